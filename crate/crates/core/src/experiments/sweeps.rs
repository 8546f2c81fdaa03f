//! Solution nets along decreasing `eps`: growth rates (moderateness) and the
//! response to negligible perturbations (uniqueness).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{fit_moderateness, local_slopes, ModeratenessFit};
use crate::fracops::{hs_norm, lp_norm, norm1, norm2, FracOrder};
use crate::grid::{boundary_mass_fraction, l2_norm, Field, Grid};
use crate::mollify::{mollifying_net, regularize, CoefficientNet, Mollifier, Perturbation};
use crate::propagate::{evolve, step_count, Scheme, SolverState, Stepper, StepperConfig};

use super::{RunSetup, Verdict};

/// Slack of the solution exponent over the coefficient and data budget.
pub const BUDGET_SLACK: f64 = 0.25;

/// Local slope that the negligibility signature must exceed.
pub const NEGLIGIBLE_SLOPE_MIN: f64 = 5.0;

/// Largest admissible boundary-mass fraction.
pub const BOUNDARY_MASS_MAX: f64 = 1e-8;

type DataFn = dyn Fn(f64, &Grid) -> Result<(Field, Field)> + Send + Sync;

/// Family `eps -> (u0_eps, u1_eps)` of initial data.
#[derive(Clone)]
pub struct DataNet {
    f: Arc<DataFn>,
    tag: String,
}

impl fmt::Debug for DataNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DataNet({})", self.tag)
    }
}

impl DataNet {
    pub fn new<F>(tag: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, &Grid) -> Result<(Field, Field)> + Send + Sync + 'static,
    {
        DataNet {
            f: Arc::new(f),
            tag: tag.into(),
        }
    }

    /// The same data for every `eps`.
    pub fn fixed(u0: Field, u1: Field) -> Self {
        DataNet::new("fixed", move |_, grid| {
            if u0.grid() != grid || u1.grid() != grid {
                return Err(Error::GridMismatch);
            }
            Ok((u0.clone(), u1.clone()))
        })
    }

    /// `(u0 * psi_eps, u1 * psi_eps)`.
    pub fn regularized(u0: Field, u1: Field, psi: Mollifier) -> Self {
        DataNet::new("regularized", move |eps, grid| {
            if u0.grid() != grid || u1.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let k = mollifying_net(&psi, eps, grid)?;
            Ok((regularize(&u0, &k)?, regularize(&u1, &k)?))
        })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn evaluate(&self, eps: f64, grid: &Grid) -> Result<(Field, Field)> {
        (self.f)(eps, grid)
    }
}

/// Measurements of one member of a solution net.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRecord {
    pub eps: f64,
    /// `||a_eps||_{L^inf}`.
    pub coef_linf: f64,
    /// `||a_eps||_{L^{d/s}}`, NaN when `d/s < 1`.
    pub coef_lds: f64,
    /// `||a_eps||_{L^{d/2s}}`, NaN when `d/2s < 1`.
    pub coef_ld2s: f64,
    /// `||b_eps||_{L^inf}`.
    pub coef_b_linf: f64,
    /// `||u0_eps||_{H^s}`.
    pub data_hs: f64,
    /// `||u1_eps||_{L^2}`.
    pub data_l2: f64,
    /// `||u0_eps||_{H^{2s}}`.
    pub data_h2s: f64,
    pub sup_norm1: f64,
    pub sup_norm2: f64,
    /// `L^2` distance at `T` to the comparison solution of the sweep.
    pub terminal_err: f64,
    /// Largest boundary-mass fraction seen during the run.
    pub boundary_mass: f64,
}

fn lp_or_nan(f: &Field, p: f64) -> Result<f64> {
    if p >= 1.0 {
        lp_norm(f, p)
    } else {
        Ok(f64::NAN)
    }
}

fn check_eps_list(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("eps_list must be strictly decreasing".into()));
    }
    Ok(())
}

fn config(setup: &RunSetup, a: Field, b: Field) -> Result<StepperConfig> {
    StepperConfig::new(setup.s, setup.dt, Scheme::StrangSplit, a, b)
}

/// Solves one member and returns its record (without `terminal_err`) and
/// terminal `u`.
fn member(
    net: &CoefficientNet,
    data: &DataNet,
    eps: f64,
    setup: &RunSetup,
) -> Result<(SweepRecord, Field)> {
    let grid = &setup.grid;
    let s = setup.s;
    let (a, b) = net.evaluate(eps, grid)?;
    let (u0, u1) = data.evaluate(eps, grid)?;
    let d = grid.dim() as f64;
    let two_s = FracOrder::new(2.0 * s.get())?;
    let mut rec = SweepRecord {
        eps,
        coef_linf: a.max_abs(),
        coef_lds: lp_or_nan(&a, d / s.get())?,
        coef_ld2s: lp_or_nan(&a, d / (2.0 * s.get()))?,
        coef_b_linf: b.max_abs(),
        data_hs: hs_norm(&u0, s)?,
        data_l2: l2_norm(&u1),
        data_h2s: hs_norm(&u0, two_s)?,
        sup_norm1: 0.0,
        sup_norm2: 0.0,
        terminal_err: 0.0,
        boundary_mass: 0.0,
    };
    let cfg = config(setup, a, b)?;
    let start = SolverState::new(u0, u1, 0.0)?;
    let stride = setup.stride.max(1);
    let steps = step_count(setup.t_final, setup.dt)?;
    let mut probe = |k: usize, st: &SolverState| -> Result<()> {
        if k.is_multiple_of(stride) || k == steps {
            rec.sup_norm1 = rec.sup_norm1.max(norm1(&st.u, &st.ut, s)?);
            rec.sup_norm2 = rec.sup_norm2.max(norm2(&st.u, &st.ut, s)?);
            rec.boundary_mass = rec
                .boundary_mass
                .max(boundary_mass_fraction(&st.u, &st.ut)?);
        }
        Ok(())
    };
    let end = evolve(&start, &cfg, setup.t_final, &mut [&mut probe])?;
    Ok((rec, end.u))
}

/// Exponent fit that treats an identically zero series as exponent zero.
fn exponent(eps: &[f64], norms: &[f64]) -> Result<ModeratenessFit> {
    if norms.iter().all(|&v| v == 0.0) {
        return Ok(ModeratenessFit {
            exponent: 0.0,
            r_squared: 1.0,
        });
    }
    fit_moderateness(eps, norms)
}

/// Outcome of a moderateness sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeratenessSweep {
    pub records: Vec<SweepRecord>,
    /// Exponent of `||a_eps||_inf`.
    pub n_a: ModeratenessFit,
    /// Exponent of `||b_eps||_inf`.
    pub n_b: ModeratenessFit,
    /// Exponent of `||u0_eps||_{H^s}`.
    pub n_u0: ModeratenessFit,
    /// Exponent of `||u1_eps||_{L^2}`.
    pub n_u1: ModeratenessFit,
    /// Exponent of `sup_t ||u_eps||_1`.
    pub n_solution: ModeratenessFit,
    /// `n_a + n_b + max(n_u0, n_u1)`.
    pub budget: f64,
    pub boundary_mass: f64,
    pub pass: bool,
}

/// Solves the regularized problem for every `eps`, fits growth exponents and
/// checks the solution exponent against the coefficient and data budget.
/// `terminal_err` is measured against the smallest `eps`.
pub fn moderateness_sweep(
    net: &CoefficientNet,
    data: &DataNet,
    eps_list: &[f64],
    setup: &RunSetup,
) -> Result<ModeratenessSweep> {
    check_eps_list(eps_list)?;
    let cells: Vec<(SweepRecord, Field)> = eps_list
        .par_iter()
        .map(|&eps| member(net, data, eps, setup))
        .collect::<Result<_>>()?;
    let last = &cells[cells.len() - 1].1;
    let mut records = Vec::with_capacity(cells.len());
    for (rec, u) in &cells {
        let mut rec = *rec;
        rec.terminal_err = l2_norm(&u.sub(last)?);
        records.push(rec);
    }
    let col = |f: fn(&SweepRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let n_a = exponent(eps_list, &col(|r| r.coef_linf))?;
    let n_b = exponent(eps_list, &col(|r| r.coef_b_linf))?;
    let n_u0 = exponent(eps_list, &col(|r| r.data_hs))?;
    let n_u1 = exponent(eps_list, &col(|r| r.data_l2))?;
    let n_solution = exponent(eps_list, &col(|r| r.sup_norm1))?;
    let budget = n_a.exponent + n_b.exponent + n_u0.exponent.max(n_u1.exponent);
    let boundary_mass = records.iter().map(|r| r.boundary_mass).fold(0.0, f64::max);
    let pass = n_solution.exponent <= budget + BUDGET_SLACK;
    Ok(ModeratenessSweep {
        records,
        n_a,
        n_b,
        n_u0,
        n_u1,
        n_solution,
        budget,
        boundary_mass,
        pass,
    })
}

impl ModeratenessSweep {
    pub fn verdict(&self) -> Verdict {
        let mut v = Verdict::new(
            "moderateness",
            self.pass,
            "sup_t ||u_eps||_1 <~ eps^-(N1 + N2 + max(N3, N4)) when ||a_eps||_inf <~ eps^-N1, ||b_eps||_inf <~ eps^-N2, ||u0_eps||_{H^s} <~ eps^-N3, ||u1_eps||_{L^2} <~ eps^-N4",
        );
        v.metric("n_coef_a", self.n_a.exponent)
            .metric("n_coef_a_r2", self.n_a.r_squared)
            .metric("n_coef_b", self.n_b.exponent)
            .metric("n_data_u0", self.n_u0.exponent)
            .metric("n_data_u1", self.n_u1.exponent)
            .metric("n_solution", self.n_solution.exponent)
            .metric("n_solution_r2", self.n_solution.r_squared)
            .metric("budget", self.budget)
            .metric("boundary_mass", self.boundary_mass)
            .threshold("budget_slack", BUDGET_SLACK)
            .threshold("boundary_mass_max", BOUNDARY_MASS_MAX);
        v
    }
}

/// Outcome of a negligibility sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct NegligibilitySweep {
    pub eps: Vec<f64>,
    /// `sup_t ||u_eps - u~_eps||_{L^2}` through the difference equation.
    pub distance: Vec<f64>,
    /// The same quantity from subtracting two independent solves.
    pub distance_direct: Vec<f64>,
    /// Local log-log slopes of `distance` between consecutive `eps`.
    pub slopes: Vec<f64>,
    pub records: Vec<SweepRecord>,
    pub boundary_mass: f64,
    pub pass: bool,
}

struct PairOutcome {
    distance: f64,
    direct: f64,
    record: SweepRecord,
}

/// Evolves `u~` (perturbed problem), the difference `U = u - u~` (forced by
/// `(a~ - a) u~ + (b~ - b) u~_t`) and `u` itself, in lockstep.
fn perturbed_pair(
    net: &CoefficientNet,
    pert: Perturbation,
    data: &DataNet,
    eps: f64,
    setup: &RunSetup,
) -> Result<PairOutcome> {
    let grid = &setup.grid;
    let s = setup.s;
    let c = pert.law.magnitude(eps);
    let (a, b) = net.evaluate(eps, grid)?;
    let (u0, u1) = data.evaluate(eps, grid)?;
    let shift = |f: &Field, on: bool| if on { f.map(|v| v + c) } else { f.clone() };
    let (pa, pb) = (shift(&a, pert.on_a), shift(&b, pert.on_b));
    let (pu0, pu1) = (shift(&u0, pert.on_u0), shift(&u1, pert.on_u1));
    let dc = |on: bool| if on { -c } else { 0.0 };

    let d = grid.dim() as f64;
    let two_s = FracOrder::new(2.0 * s.get())?;
    let mut record = SweepRecord {
        eps,
        coef_linf: a.max_abs(),
        coef_lds: lp_or_nan(&a, d / s.get())?,
        coef_ld2s: lp_or_nan(&a, d / (2.0 * s.get()))?,
        coef_b_linf: b.max_abs(),
        data_hs: hs_norm(&u0, s)?,
        data_l2: l2_norm(&u1),
        data_h2s: hs_norm(&u0, two_s)?,
        sup_norm1: 0.0,
        sup_norm2: 0.0,
        terminal_err: 0.0,
        boundary_mass: 0.0,
    };

    let base = Stepper::new(&config(setup, a, b)?);
    let perturbed = Stepper::new(&config(setup, pa, pb)?);
    let mut u = SolverState::new(u0, u1, 0.0)?;
    let mut pu = SolverState::new(pu0, pu1, 0.0)?;
    let mut du = SolverState::new(
        Field::constant(grid, dc(pert.on_u0)),
        Field::constant(grid, dc(pert.on_u1)),
        0.0,
    )?;
    let forcing = |st: &SolverState| -> Field {
        let mut f = Field::zeros(grid);
        if pert.on_a {
            f.axpy(c, &st.u).expect("same grid");
        }
        if pert.on_b {
            f.axpy(c, &st.ut).expect("same grid");
        }
        f
    };

    let steps = step_count(setup.t_final, setup.dt)?;
    let stride = setup.stride.max(1);
    let mut distance = l2_norm(&du.u);
    let mut direct = l2_norm(&u.u.sub(&pu.u)?);
    let observe = |k: usize, u: &SolverState, rec: &mut SweepRecord| -> Result<()> {
        if k.is_multiple_of(stride) || k == steps {
            rec.sup_norm1 = rec.sup_norm1.max(norm1(&u.u, &u.ut, s)?);
            rec.sup_norm2 = rec.sup_norm2.max(norm2(&u.u, &u.ut, s)?);
            rec.boundary_mass = rec.boundary_mass.max(boundary_mass_fraction(&u.u, &u.ut)?);
        }
        Ok(())
    };
    observe(0, &u, &mut record)?;
    for k in 1..=steps {
        let f_start = forcing(&pu);
        perturbed.step(&mut pu)?;
        let f_end = forcing(&pu);
        base.step_forced(&mut du, &f_start, &f_end)?;
        base.step(&mut u)?;
        distance = distance.max(l2_norm(&du.u));
        direct = direct.max(l2_norm(&u.u.sub(&pu.u)?));
        observe(k, &u, &mut record)?;
    }
    record.terminal_err = l2_norm(&du.u);
    Ok(PairOutcome {
        distance,
        direct,
        record,
    })
}

/// Compares the solution net with the net of a negligibly perturbed problem.
/// Passes when the local slopes of the distance increase strictly and the
/// last one exceeds [`NEGLIGIBLE_SLOPE_MIN`].
pub fn negligibility_sweep(
    net: &CoefficientNet,
    pert: Perturbation,
    data: &DataNet,
    eps_list: &[f64],
    setup: &RunSetup,
) -> Result<NegligibilitySweep> {
    check_eps_list(eps_list)?;
    if eps_list.len() < 2 {
        return Err(Error::DegenerateFit("need at least two eps".into()));
    }
    let cells: Vec<PairOutcome> = eps_list
        .par_iter()
        .map(|&eps| perturbed_pair(net, pert, data, eps, setup))
        .collect::<Result<_>>()?;
    let distance: Vec<f64> = cells.iter().map(|c| c.distance).collect();
    let distance_direct: Vec<f64> = cells.iter().map(|c| c.direct).collect();
    let records: Vec<SweepRecord> = cells.iter().map(|c| c.record).collect();
    let slopes = if distance.iter().all(|&v| v > 0.0) {
        local_slopes(eps_list, &distance)
    } else {
        Vec::new()
    };
    let increasing = !slopes.is_empty() && slopes.windows(2).all(|w| w[1] > w[0]);
    let steep = slopes.last().is_some_and(|&k| k > NEGLIGIBLE_SLOPE_MIN);
    let boundary_mass = records.iter().map(|r| r.boundary_mass).fold(0.0, f64::max);
    Ok(NegligibilitySweep {
        eps: eps_list.to_vec(),
        distance,
        distance_direct,
        slopes,
        records,
        boundary_mass,
        pass: increasing && steep,
    })
}

impl NegligibilitySweep {
    /// Largest relative disagreement between the two distance estimates over
    /// the members where the direct subtraction is still meaningful
    /// (distance above `1e-10` of the solution size).
    pub fn route_disagreement(&self) -> f64 {
        self.distance
            .iter()
            .zip(&self.distance_direct)
            .zip(&self.records)
            .filter(|((d, _), r)| **d > 1e-10 * r.sup_norm1)
            .map(|((d, dd), _)| (d - dd).abs() / d)
            .fold(0.0, f64::max)
    }

    pub fn verdict(&self) -> Verdict {
        let mut v = Verdict::new(
            "negligibility",
            self.pass,
            "sup_t ||u_eps - u~_eps||_{L^2} <~ eps^k for every k when the coefficients and data differ by nets with ||f_eps|| <~ eps^k for every k",
        );
        for (i, k) in self.slopes.iter().enumerate() {
            v.metric(&format!("slope_{i}"), *k);
        }
        v.metric("route_disagreement", self.route_disagreement())
            .metric("boundary_mass", self.boundary_mass)
            .threshold("final_slope_min", NEGLIGIBLE_SLOPE_MIN)
            .threshold("boundary_mass_max", BOUNDARY_MASS_MAX);
        v
    }
}
