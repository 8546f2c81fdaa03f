//! Strang splitting against the modal closed form for constant mass and
//! damping. The error falls by four each time `dt` halves.

use std::f64::consts::PI;

use fracwave::fit::convergence_order;
use fracwave::grid::{forward, inverse, l2_norm};
use fracwave::propagate::{evolve, modal_oracle};
use fracwave::{Field, FracOrder, Grid, Scheme, SolverState, StepperConfig};

fn main() -> fracwave::Result<()> {
    let grid = Grid::new(1, 128, PI)?;
    let s = FracOrder::new(0.5)?;
    let (a, b, t_final) = (1.5, 0.4, 1.0);
    let u0 = Field::from_fn(&grid, |x| (-2.0 * x[0] * x[0]).exp())?;
    let u1 = Field::from_fn(&grid, |x| x[0] * (-x[0] * x[0]).exp())?;

    let (uh, _) = modal_oracle(&forward(&u0)?, &forward(&u1)?, a, b, s, t_final)?;
    let exact = inverse(&uh)?;
    let start = SolverState::new(u0, u1, 0.0)?;

    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for steps in [64.0, 128.0, 256.0, 512.0] {
        let dt = t_final / steps;
        let cfg = StepperConfig::new(
            s,
            dt,
            Scheme::StrangSplit,
            Field::constant(&grid, a),
            Field::constant(&grid, b),
        )?;
        let end = evolve(&start, &cfg, t_final, &mut [])?;
        let err = l2_norm(&end.u.sub(&exact)?);
        println!("dt = {dt:.3e}  L2 error = {err:.3e}");
        dts.push(dt);
        errs.push(err);
    }
    println!("fitted order {:.3}", convergence_order(&dts, &errs)?.slope);
    Ok(())
}
