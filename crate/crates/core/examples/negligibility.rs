//! Perturbs a delta-like mass by `exp(-1/eps)` and by `eps^2` and compares
//! how fast the solution nets merge. The first gap shrinks faster than any
//! power of `eps`; the second only like `eps^2`.

use fracwave::experiments::{negligibility_sweep, DataNet, RunSetup};
use fracwave::mollify::{
    coefficient_net, make_mollifier, CoefficientSpec, Perturbation, PerturbationLaw,
};
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
    let net = coefficient_net(CoefficientSpec::delta(1), CoefficientSpec::Zero, psi)?;
    let eps = [0.25, 0.125, 0.0625, 0.03125];

    for (name, law) in [
        ("exp(-1/eps)", PerturbationLaw::Exponential),
        ("eps^2", PerturbationLaw::Power(2.0)),
    ] {
        let sw = negligibility_sweep(&net, Perturbation::on_mass(law), &data, &eps, &setup)?;
        println!("{name}:");
        for (e, d) in sw.eps.iter().zip(&sw.distance) {
            println!("  eps {e:.4}  distance {d:.3e}");
        }
        println!("  slopes {:.2?}, negligible {}", sw.slopes, sw.pass);
    }
    Ok(())
}
