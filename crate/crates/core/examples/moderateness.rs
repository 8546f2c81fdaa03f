//! Sweeps `eps` for a delta-like mass and reports how coefficient, data and
//! solution norms grow as `eps -> 0`.

use fracwave::experiments::{moderateness_sweep, DataNet, RunSetup};
use fracwave::mollify::{coefficient_net, make_mollifier, CoefficientSpec};
use fracwave::{Field, FracOrder, Grid};

fn main() -> fracwave::Result<()> {
    let grid = Grid::new(1, 512, 2.0)?;
    let setup = RunSetup {
        grid: grid.clone(),
        s: FracOrder::new(1.0)?,
        t_final: 0.25,
        dt: 1.0 / 1024.0,
        stride: 8,
    };
    let u0 = Field::from_fn(&grid, |x| (-16.0 * x[0] * x[0]).exp())?;
    let data = DataNet::fixed(u0, Field::zeros(&grid));
    let psi = make_mollifier(&Grid::new(1, 64, 2.0)?)?;
    let eps = [0.25, 0.125, 0.0625, 0.03125];

    for (name, spec) in [
        ("delta", CoefficientSpec::delta(1)),
        ("delta squared", CoefficientSpec::delta_squared(1)),
    ] {
        let net = coefficient_net(spec, CoefficientSpec::Zero, psi.clone())?;
        let sw = moderateness_sweep(&net, &data, &eps, &setup)?;
        println!("{name}:");
        for r in &sw.records {
            println!(
                "  eps {:.4}  ||a||_inf {:>10.3}  sup ||u||_1 {:.6}",
                r.eps, r.coef_linf, r.sup_norm1
            );
        }
        println!(
            "  exponents: a {:.3}, solution {:.3}, budget {:.3}, pass {}",
            sw.n_a.exponent, sw.n_solution.exponent, sw.budget, sw.pass
        );
    }
    Ok(())
}
