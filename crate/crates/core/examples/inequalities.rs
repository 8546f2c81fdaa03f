//! Functional inequalities on random band-limited fields: Hölder, the
//! fractional Sobolev embedding, and the two a-priori energy bounds over the
//! seeded random problem suite.

use std::f64::consts::PI;

use fracwave::experiments::{
    energy_estimate_audit, higher_energy_estimate_audit, random_suite, RunSetup, SuiteSpec,
};
use fracwave::fracops::{holder_sides, project_mean_zero, sobolev_check};
use fracwave::{Field, FracOrder, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rng: &mut ChaCha8Rng, grid: &Grid) -> fracwave::Result<Field> {
    let terms: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(1.0..6.0f64).floor(),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    Field::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, amp, ph)| amp * (k * x[0] + ph).cos())
            .sum::<f64>()
    })
}

fn main() -> fracwave::Result<()> {
    let grid = Grid::new(1, 128, PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let mut tightest = 0.0f64;
    for _ in 0..200 {
        let f = random_field(&mut rng, &grid)?;
        let g = random_field(&mut rng, &grid)?;
        let p: f64 = rng.random_range(1.1..6.0);
        let q = p / (p - 1.0);
        let (lhs, rhs) = holder_sides(&f, &g, p, q)?;
        tightest = tightest.max(lhs / rhs);
    }
    println!("Hölder: largest lhs/rhs over 200 draws {tightest:.4}");

    let s = FracOrder::new(0.25)?;
    let f = project_mean_zero(&random_field(&mut rng, &grid)?);
    let sob = sobolev_check(&f, s)?;
    println!(
        "Sobolev (s = 0.25, q = {:.2}): ||f||_q {:.4} <= C |f|_s {:.4}",
        sob.q, sob.lhs, sob.rhs
    );

    let runs = random_suite(&SuiteSpec::default());
    let setup = |s: f64| -> fracwave::Result<RunSetup> {
        Ok(RunSetup {
            grid: grid.clone(),
            s: FracOrder::new(s)?,
            t_final: 2.0,
            dt: 1.0 / 64.0,
            stride: 1,
        })
    };
    let e1 = energy_estimate_audit(&runs, &setup(0.5)?)?;
    let e2 = higher_energy_estimate_audit(&runs, &setup(0.25)?)?;
    println!(
        "energy estimate: worst ratio {:.4} (bound {}) over {} runs",
        e1.worst,
        e1.bound,
        e1.ratios.len()
    );
    println!(
        "higher energy estimate: worst ratio {:.4} (bound {})",
        e2.worst, e2.bound
    );
    Ok(())
}
