//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any of them fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use fracwave::cli::{run_study, RunConfig, Study, COHERENCE_CSV, ENERGY_CSV, SWEEP_CSV};
use fracwave::duhamel::{duhamel_equivalence, SourceTerm};
use fracwave::experiments::bounds::refinement_change;
use fracwave::experiments::energy::energy_refinement;
use fracwave::experiments::{
    coherence_study, energy_estimate_audit, higher_energy_estimate_audit, moderateness_sweep,
    negligibility_sweep, random_suite, DataNet, RunSetup, SuiteSpec,
};
use fracwave::fit::convergence_order;
use fracwave::fracops::{holder_sides, project_mean_zero, sobolev_check};
use fracwave::grid::{forward, inverse, l2_norm};
use fracwave::mollify::{
    coefficient_net, make_mollifier, CoefficientSpec, Mollifier, Perturbation, PerturbationLaw,
};
use fracwave::propagate::{evolve, modal_oracle, Stepper};
use fracwave::{Field, FracOrder, Grid, Scheme, SolverState, StepperConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = fracwave::Result<(bool, String)>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn order(s: f64) -> FracOrder {
    FracOrder::new(s).unwrap()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn powers_of_two(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

fn reference_mollifier() -> Mollifier {
    make_mollifier(&Grid::new(1, 64, 2.0).unwrap()).unwrap()
}

/// Single Fourier modes against `cos(t |xi|^s)`, step by step and over one
/// full period.
fn free_propagator_exactness() -> Outcome {
    let mut worst_step = 0.0f64;
    let mut worst_period = 0.0f64;
    for (d, n, k, s) in [(1, 64, 4.0, 0.5), (1, 64, 7.0, 0.3), (2, 16, 3.0, 0.75)] {
        let grid = Grid::new(d, n, PI)?;
        let xi = if d == 1 { k } else { (2.0f64 * k * k).sqrt() };
        let omega = f64::powf(xi, s);
        let mode = Field::from_fn(&grid, |x| x.iter().map(|&xj| (k * xj).cos()).product())?;
        let period = 2.0 * PI / omega;
        let steps = 128;
        let cfg = StepperConfig::free(&grid, order(s), period / steps as f64)?;
        let stepper = Stepper::new(&cfg);
        let mut st = SolverState::new(mode.clone(), Field::zeros(&grid), 0.0)?;
        for j in 1..=steps {
            stepper.step(&mut st)?;
            let t = j as f64 * cfg.dt();
            let (c, sn) = ((omega * t).cos(), (omega * t).sin());
            let eu = st.u.zip_map(&mode, |u, m| u - c * m)?.max_abs();
            let ev = st.ut.zip_map(&mode, |v, m| v + omega * sn * m)?.max_abs();
            worst_step = worst_step.max(eu).max(ev / omega);
        }
        worst_period = worst_period.max(st.u.sub(&mode)?.max_abs());
    }
    Ok((
        worst_step <= 1e-12 && worst_period <= 1e-10,
        format!("max per-step error {worst_step:.2e} (<= 1e-12), period return {worst_period:.2e} (<= 1e-10)"),
    ))
}

/// Strang splitting against the modal closed form for constant `a, b`.
fn constant_coefficient_oracle() -> Outcome {
    let grid = Grid::new(1, 128, PI)?;
    let s = order(0.5);
    let (a0, b0, t_final) = (1.5, 0.4, 1.0);
    let u0 = Field::from_fn(&grid, |x| (-2.0 * x[0] * x[0]).exp())?;
    let u1 = Field::from_fn(&grid, |x| x[0] * (-x[0] * x[0]).exp())?;
    let (uh, _) = modal_oracle(&forward(&u0)?, &forward(&u1)?, a0, b0, s, t_final)?;
    let exact = inverse(&uh)?;
    let start = SolverState::new(u0, u1, 0.0)?;
    let dts: Vec<f64> = [256.0, 512.0, 1024.0].iter().map(|m| t_final / m).collect();
    let mut errs = Vec::new();
    for &dt in &dts {
        let cfg = StepperConfig::new(
            s,
            dt,
            Scheme::StrangSplit,
            Field::constant(&grid, a0),
            Field::constant(&grid, b0),
        )?;
        let end = evolve(&start, &cfg, t_final, &mut [])?;
        errs.push(l2_norm(&end.u.sub(&exact)?));
    }
    let p = convergence_order(&dts, &errs)?.slope;
    Ok((
        (1.9..=2.1).contains(&p),
        format!("errors {}, order {p:.3} (in [1.9, 2.1])", sci(&errs)),
    ))
}

/// Randomized smooth problems: monotone energy and second-order dissipation
/// identity.
fn energy_law() -> Outcome {
    let grid = Grid::new(1, 64, PI)?;
    let s = order(0.5);
    let t_final = 2.0;
    let runs = random_suite(&SuiteSpec::default());
    let mut worst = 0.0f64;
    let mut min_order = f64::INFINITY;
    let mut failures = 0;
    for run in &runs {
        let f = run.fields(&grid)?;
        let cfg = StepperConfig::new(s, t_final / 64.0, Scheme::StrangSplit, f.a, f.b)?;
        let st = SolverState::new(f.u0, f.u1, 0.0)?;
        let r = energy_refinement(&st, &cfg, t_final, 1, 3)?;
        for a in &r.audits {
            worst = worst.max(a.overshoot / a.band);
        }
        min_order = min_order.min(r.residual_order.unwrap_or(f64::INFINITY));
        failures += usize::from(!r.pass);
    }
    Ok((
        failures == 0,
        format!(
            "{} runs, {failures} failures, worst overshoot/band {worst:.2e}, min residual order {min_order:.3} (>= 1.9)",
            runs.len()
        ),
    ))
}

/// Duhamel superposition against direct stepping on N = 64.
fn duhamel_equivalence_check() -> Outcome {
    let grid = Grid::new(1, 64, PI)?;
    let a = Field::from_fn(&grid, |x| 1.0 + 0.5 * x[0].cos())?;
    let b = Field::from_fn(&grid, |x| 0.3 + 0.2 * (2.0 * x[0]).sin())?;
    let cfg = StepperConfig::new(order(0.5), 1.0 / 32.0, Scheme::StrangSplit, a, b)?;
    let u0 = Field::from_fn(&grid, |x| (-2.0 * x[0] * x[0]).exp())?;
    let u1 = Field::zeros(&grid);
    let profile = Field::from_fn(&grid, |x| (-(x[0] - 0.5).powi(2)).exp())?;
    let source = SourceTerm::separable("cos(3t) bump", profile, |t| (3.0 * t).cos());
    let c = duhamel_equivalence(&u0, &u1, &cfg, &source, 1.0, 9)?;
    Ok((
        c.pass(),
        format!(
            "gap {:.2e} vs tolerance {:.2e}, C1 ratio {:.3}, C2 ratio {:.3} (in [0.8, 1.25])",
            c.gap,
            c.tolerance,
            c.c1_ratio(),
            c.c2_ratio()
        ),
    ))
}

fn sweep_setup() -> fracwave::Result<(RunSetup, DataNet)> {
    let grid = Grid::new(1, 2048, 2.0)?;
    let u0 = Field::from_fn(&grid, |x| (-16.0 * x[0] * x[0]).exp())?;
    let setup = RunSetup {
        grid: grid.clone(),
        s: order(1.0),
        t_final: 0.5,
        dt: 2.5e-4,
        stride: 20,
    };
    Ok((setup, DataNet::fixed(u0, Field::zeros(&grid))))
}

/// Growth exponents of delta-like and delta-squared-like mass nets.
fn moderateness_exponents() -> Outcome {
    let (setup, data) = sweep_setup()?;
    let eps = powers_of_two(3, 7);
    let mut pass = true;
    let mut detail = Vec::new();
    for (spec, target) in [
        (CoefficientSpec::delta(1), 1.0),
        (CoefficientSpec::delta_squared(1), 2.0),
    ] {
        let net = coefficient_net(spec, CoefficientSpec::Zero, reference_mollifier())?;
        let sw = moderateness_sweep(&net, &data, &eps, &setup)?;
        let n = sw.n_a.exponent;
        pass &= (n - target).abs() <= 0.05 && sw.pass;
        detail.push(format!(
            "N_a {n:.4} (target {target}), solution {:.3} vs budget {:.3}",
            sw.n_solution.exponent, sw.budget
        ));
    }
    Ok((pass, detail.join("; ")))
}

/// Exponentially small perturbations are invisible at every power of eps;
/// an `eps^2` perturbation is not.
fn negligibility_slopes() -> Outcome {
    let (setup, data) = sweep_setup()?;
    let eps = powers_of_two(3, 7);
    let net = coefficient_net(
        CoefficientSpec::delta(1),
        CoefficientSpec::Zero,
        reference_mollifier(),
    )?;
    let neg = negligibility_sweep(
        &net,
        Perturbation::on_mass(PerturbationLaw::Exponential),
        &data,
        &eps,
        &setup,
    )?;
    // slope over [2^-4, 2^-5]
    let steep_by_2m5 = neg.slopes.get(1).is_some_and(|&k| k > 5.0);
    let control = negligibility_sweep(
        &net,
        Perturbation::on_mass(PerturbationLaw::Power(2.0)),
        &data,
        &eps,
        &setup,
    )?;
    let control_ok = !control.pass
        && !control.slopes.is_empty()
        && control.slopes.iter().all(|k| (k - 2.0).abs() <= 0.2);
    Ok((
        neg.pass && steep_by_2m5 && control_ok,
        format!(
            "exp(-1/eps) slopes {:.2?} (verdict {}); eps^2 control slopes {:.3?} (verdict {})",
            neg.slopes,
            if neg.pass { "PASS" } else { "FAIL" },
            control.slopes,
            if control.pass { "PASS" } else { "FAIL" }
        ),
    ))
}

/// Regularized solutions approach the classical one for smooth coefficients.
fn coherence() -> Outcome {
    let grid = Grid::new(1, 2048, PI)?;
    let setup = RunSetup {
        grid: grid.clone(),
        s: order(1.0),
        t_final: 1.0,
        dt: 1.0 / 2048.0,
        stride: 10,
    };
    let eps = powers_of_two(3, 6);
    let psi = reference_mollifier();
    let u0 = Field::from_fn(&grid, |x| (-4.0 * x[0] * x[0]).exp())?;
    let z = Field::zeros(&grid);
    let a = Field::from_fn(&grid, |x| 1.0 + x[0].cos().powi(2))?;
    let b = Field::from_fn(&grid, |x| 0.5 + 0.3 * (2.0 * x[0]).sin())?;
    let smooth = coherence_study(&a, &b, &u0, &z, &psi, &eps, &setup)?;
    let constant = coherence_study(
        &Field::constant(&grid, 1.3),
        &Field::constant(&grid, 0.4),
        &u0,
        &z,
        &psi,
        &eps,
        &setup,
    )?;
    let worst_const = constant.errors.iter().copied().fold(0.0, f64::max);
    let order = smooth.order.unwrap_or(f64::NAN);
    Ok((
        smooth.monotone && order >= 0.9 && worst_const <= 1e-12,
        format!(
            "smooth errors {}, order {order:.3} (>= 0.9); constant max error {worst_const:.1e} (<= 1e-12)",
            sci(&smooth.errors)
        ),
    ))
}

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
    let c = rng.random_range(-0.5..0.5);
    Field::from_fn(grid, |x| {
        c + terms
            .iter()
            .map(|(k, amp, ph)| amp * (k * x[0] + ph).cos())
            .sum::<f64>()
    })
}

/// Hölder on random triples, the Sobolev ratio and the bound ratios under
/// grid refinement.
fn inequality_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = Grid::new(1, 128, PI)?;
    let mut violations = 0;
    for _ in 0..1000 {
        let f = random_field(&mut rng, &grid)?;
        let g = random_field(&mut rng, &grid)?;
        let p: f64 = rng.random_range(1.0..8.0);
        let p = p.max(1.05);
        let q = p / (p - 1.0) + rng.random_range(0.0..8.0);
        let (lhs, rhs) = holder_sides(&f, &g, p, q)?;
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
    }

    let s = order(0.25);
    let mut sob = [0.0f64; 2];
    for (slot, n) in [256, 512].into_iter().enumerate() {
        let grid = Grid::new(1, n, PI)?;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let f = project_mean_zero(&random_field(&mut rng, &grid)?);
            if let Some(r) = sobolev_check(&f, s)?.ratio {
                sob[slot] = sob[slot].max(r);
            }
        }
    }
    let sob_change = (sob[1] / sob[0] - 1.0).abs();

    let runs = random_suite(&SuiteSpec::default());
    let setup = |n: usize, s: f64| -> fracwave::Result<RunSetup> {
        Ok(RunSetup {
            grid: Grid::new(1, n, PI)?,
            s: order(s),
            t_final: 2.0,
            dt: 1.0 / 64.0,
            stride: 1,
        })
    };
    let e1 = energy_estimate_audit(&runs, &setup(128, 0.5)?)?;
    let e1_fine = energy_estimate_audit(&runs, &setup(256, 0.5)?)?;
    let e2 = higher_energy_estimate_audit(&runs, &setup(128, 0.25)?)?;
    let e2_fine = higher_energy_estimate_audit(&runs, &setup(256, 0.25)?)?;
    let c1 = refinement_change(&e1, &e1_fine);
    let c2 = refinement_change(&e2, &e2_fine);

    let pass = violations == 0
        && sob[0].is_finite()
        && sob_change < 0.05
        && e1.pass
        && e1_fine.pass
        && e2.pass
        && e2_fine.pass
        && c1 < 0.05
        && c2 < 0.05;
    Ok((
        pass,
        format!(
            "Hölder violations {violations}/1000; Sobolev ratio {:.4} -> {:.4} ({:.2}% change); energy-estimate ratio {:.4} -> {:.4} (bound {}), higher {:.4} -> {:.4} (bound {})",
            sob[0],
            sob[1],
            100.0 * sob_change,
            e1.worst,
            e1_fine.worst,
            e1.bound,
            e2.worst,
            e2_fine.worst,
            e2.bound
        ),
    ))
}

const DETERMINISM_CONFIGS: [(Study, &str, &str); 3] = [
    (
        Study::Solve,
        ENERGY_CSV,
        r#"{"grid": {"d": 1, "n": 256, "l": 3.141592653589793}, "s": 0.5, "t_final": 1.0, "dt": 0.0078125,
            "coefficients": {"a": {"kind": "random"}, "b": {"kind": "random"}},
            "data": {"u0": {"preset": "random"}, "u1": {"preset": "random"}}, "observer_stride": 4, "seed": 7}"#,
    ),
    (
        Study::SweepModerateness,
        SWEEP_CSV,
        r#"{"grid": {"d": 1, "n": 512, "l": 2.0}, "s": 1.0, "t_final": 0.25, "dt": 0.0009765625,
            "coefficients": {"a": {"kind": "delta"}},
            "data": {"u0": {"preset": "gaussian", "width": 0.25}},
            "eps_list": [0.25, 0.125, 0.0625, 0.03125], "observer_stride": 8}"#,
    ),
    (
        Study::Coherence,
        COHERENCE_CSV,
        r#"{"grid": {"d": 1, "n": 256, "l": 3.141592653589793}, "s": 1.0, "t_final": 0.5, "dt": 0.001953125,
            "coefficients": {"a": {"kind": "smooth_cosine", "offset": 1.0, "amplitude": 0.5}},
            "data": {"u0": {"preset": "gaussian", "width": 0.5}},
            "eps_list": [0.5, 0.25, 0.125]}"#,
    ),
];

/// Byte-identical CSVs at 1, 2 and 8 threads.
fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| fracwave::Error::Config(e.to_string()))?;
    let mut mismatches = Vec::new();
    for (study, csv, text) in DETERMINISM_CONFIGS {
        let cfg = RunConfig::from_json(text)?;
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        for threads in [1, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| fracwave::Error::Config(e.to_string()))?;
            let out = tmp.path().join(format!("{study:?}-{threads}"));
            pool.install(|| run_study(study, &cfg, &out))?;
            outputs.push(read(&out.join(csv))?);
        }
        if outputs.iter().any(|o| o != &outputs[0]) || outputs[0].is_empty() {
            mismatches.push(format!("{study:?}"));
        }
    }
    Ok((
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "energy.csv, sweep.csv, coherence.csv identical across 1, 2, 8 threads".into()
        } else {
            format!("differing outputs: {}", mismatches.join(", "))
        },
    ))
}

fn read(path: &Path) -> fracwave::Result<Vec<u8>> {
    fs::read(path).map_err(|e| fracwave::Error::Config(format!("{}: {e}", path.display())))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "free propagator exactness",
            budget: Duration::from_secs(1),
            run: free_propagator_exactness,
        },
        Criterion {
            id: 2,
            name: "constant-coefficient oracle",
            budget: Duration::from_secs(10),
            run: constant_coefficient_oracle,
        },
        Criterion {
            id: 3,
            name: "energy law",
            budget: Duration::from_secs(120),
            run: energy_law,
        },
        Criterion {
            id: 4,
            name: "duhamel equivalence",
            budget: Duration::from_secs(60),
            run: duhamel_equivalence_check,
        },
        Criterion {
            id: 5,
            name: "moderateness exponents",
            budget: Duration::from_secs(180),
            run: moderateness_exponents,
        },
        Criterion {
            id: 6,
            name: "negligibility",
            budget: Duration::from_secs(180),
            run: negligibility_slopes,
        },
        Criterion {
            id: 7,
            name: "coherence",
            budget: Duration::from_secs(120),
            run: coherence,
        },
        Criterion {
            id: 8,
            name: "inequality suite",
            budget: Duration::from_secs(60),
            run: inequality_suite,
        },
        Criterion {
            id: 9,
            name: "determinism across thread counts",
            budget: Duration::from_secs(300),
            run: determinism,
        },
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => {
                let in_time = elapsed <= c.budget;
                let note = if in_time {
                    String::new()
                } else {
                    format!(", over the {:?} budget", c.budget)
                };
                (pass && in_time, format!("{detail}{note}"))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {} {}: {} [{:.2} s] {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
