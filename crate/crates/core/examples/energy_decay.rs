//! Energy bookkeeping for a wave crossing a localized damping spike: the
//! energy drops while the pulse passes the spike, and energy plus dissipated
//! work stays constant.

use std::f64::consts::PI;

use fracwave::experiments::energy::monitored_run;
use fracwave::experiments::energy_audit;
use fracwave::{Field, FracOrder, Grid, Scheme, SolverState, StepperConfig};

fn main() -> fracwave::Result<()> {
    let grid = Grid::new(1, 256, PI)?;
    let a = Field::constant(&grid, 0.5);
    let b = Field::from_fn(&grid, |x| 4.0 * (-16.0 * (x[0] - 1.0).powi(2)).exp())?;
    let dt = 1e-3;
    let cfg = StepperConfig::new(FracOrder::new(0.75)?, dt, Scheme::StrangSplit, a, b)?;
    let u0 = Field::from_fn(&grid, |x| (-4.0 * x[0] * x[0]).exp())?;
    let start = SolverState::new(u0, Field::zeros(&grid), 0.0)?;

    let (_, records) = monitored_run(&start, &cfg, 4.0, 250)?;
    println!(
        "{:>5}  {:>12}  {:>12}  {:>12}",
        "t", "E", "dissipated", "E + diss"
    );
    for r in &records {
        println!(
            "{:>5.2}  {:>12.8}  {:>12.8}  {:>12.8}",
            r.t,
            r.energy,
            r.dissipated,
            r.energy + r.dissipated
        );
    }
    let audit = energy_audit(&records, dt)?;
    println!(
        "overshoot {:.2e} (band {:.2e}), residual {:.2e}, pass {}",
        audit.overshoot, audit.band, audit.residual, audit.pass
    );
    Ok(())
}
