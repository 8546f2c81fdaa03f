//! Solves a forced telegraph problem twice, by Duhamel superposition and by
//! direct stepping, and reports how the gap splits into time-step and
//! quadrature contributions.

use std::f64::consts::PI;

use fracwave::duhamel::{duhamel_equivalence, SourceTerm};
use fracwave::{Field, FracOrder, Grid, Scheme, StepperConfig};

fn main() -> fracwave::Result<()> {
    let grid = Grid::new(1, 64, PI)?;
    let a = Field::from_fn(&grid, |x| 1.0 + 0.5 * x[0].cos())?;
    let b = Field::from_fn(&grid, |x| 0.3 + 0.2 * (2.0 * x[0]).sin())?;
    let cfg = StepperConfig::new(FracOrder::new(0.5)?, 1.0 / 32.0, Scheme::StrangSplit, a, b)?;

    let u0 = Field::from_fn(&grid, |x| (-2.0 * x[0] * x[0]).exp())?;
    let u1 = Field::zeros(&grid);
    let profile = Field::from_fn(&grid, |x| (-(x[0] - 0.5).powi(2)).exp())?;
    let source = SourceTerm::separable("cos(3t) bump", profile, |t| (3.0 * t).cos());

    let check = duhamel_equivalence(&u0, &u1, &cfg, &source, 1.0, 9)?;
    println!("dt = {}, M = {}", check.dt, check.m);
    println!("gap       = {:.3e}", check.gap);
    println!("tolerance = {:.3e}", check.tolerance);
    println!(
        "C1 = {:.4e}, {:.4e} (ratio {:.3})",
        check.c1[0],
        check.c1[1],
        check.c1_ratio()
    );
    println!(
        "C2 = {:.4e}, {:.4e} (ratio {:.3})",
        check.c2[0],
        check.c2[1],
        check.c2_ratio()
    );
    println!("pass = {}", check.pass());
    Ok(())
}
