//! Smooth coefficients regularized at scale `eps` against the unregularized
//! solution. The error closes at a rate set by the mollifier.

use std::f64::consts::PI;

use fracwave::experiments::{coherence_study, RunSetup};
use fracwave::mollify::make_mollifier;
use fracwave::{Field, FracOrder, Grid};

fn main() -> fracwave::Result<()> {
    let grid = Grid::new(1, 1024, PI)?;
    let setup = RunSetup {
        grid: grid.clone(),
        s: FracOrder::new(1.0)?,
        t_final: 0.5,
        dt: 1.0 / 1024.0,
        stride: 10,
    };
    let a = Field::from_fn(&grid, |x| 1.0 + x[0].cos().powi(2))?;
    let b = Field::from_fn(&grid, |x| 0.5 + 0.3 * (2.0 * x[0]).sin())?;
    let u0 = Field::from_fn(&grid, |x| (-4.0 * x[0] * x[0]).exp())?;
    let z = Field::zeros(&grid);
    let psi = make_mollifier(&Grid::new(1, 64, 2.0)?)?;
    let eps = [0.25, 0.125, 0.0625, 0.03125];

    let study = coherence_study(&a, &b, &u0, &z, &psi, &eps, &setup)?;
    for (e, err) in eps.iter().zip(&study.errors) {
        println!("eps {e:.5}  sup_t ||u_eps - u||_2 = {err:.3e}");
    }
    match study.order {
        Some(p) => println!("fitted order {p:.3}, pass {}", study.pass),
        None => println!("errors at rounding level, pass {}", study.pass),
    }
    Ok(())
}
