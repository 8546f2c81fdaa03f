use clap::Parser;
use fracwave::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
