//! A single cosine mode under the free fractional flow, compared with its
//! closed form `cos(t |k|^s) cos(k x)` at a few times.

use std::f64::consts::PI;

use fracwave::propagate::Stepper;
use fracwave::{Field, FracOrder, Grid, SolverState, StepperConfig};

fn main() -> fracwave::Result<()> {
    let grid = Grid::new(1, 64, PI)?;
    let (k, s) = (5.0, 0.5);
    let omega = f64::powf(k, s);
    let mode = Field::from_fn(&grid, |x| (k * x[0]).cos())?;

    // As coarse as the CFL bound allows; the free flow itself is exact.
    let cfg = StepperConfig::free(&grid, FracOrder::new(s)?, 0.08)?;
    let stepper = Stepper::new(&cfg);
    let mut st = SolverState::new(mode.clone(), Field::zeros(&grid), 0.0)?;

    println!("{:>6}  {:>12}  {:>10}", "t", "u(0, t)", "error");
    for j in 1..=16 {
        stepper.step(&mut st)?;
        let t = j as f64 * cfg.dt();
        let c = (omega * t).cos();
        let err = st.u.zip_map(&mode, |u, m| u - c * m)?.max_abs();
        println!("{t:>6.2}  {:>12.8}  {err:>10.2e}", st.u.values()[32]);
    }
    Ok(())
}
