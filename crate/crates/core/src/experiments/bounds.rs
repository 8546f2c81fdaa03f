//! Audits of the a-priori bounds
//!
//! ```text
//! ||u(t)||_1 <= C (1 + |a|_inf)(1 + |b|_inf) (||u0||_{H^s} + ||u1||_{L^2})
//! ||u(t)||_2 <= C (1 + |a|_{d/s})(1 + |a|_{d/2s})(1 + |b|_{d/s})^2 (||u0||_{H^{2s}} + ||u1||_{H^s})
//! ```
//!
//! The constant `C` is not known, so each audit measures the ratio of the
//! left side (sup over the run) to the bracket and compares the worst ratio
//! of a randomized suite with a frozen regression bound.

use rayon::prelude::*;

use crate::error::Result;
use crate::fracops::{hs_norm, lp_norm, norm1, norm2, FracOrder};
use crate::grid::l2_norm;
use crate::propagate::{evolve, Scheme, SolverState, StepperConfig};

use super::suite::{RandomRun, RunFields};
use super::{RunSetup, Verdict};

/// Frozen bound on the worst first-order ratio of the default suite.
pub const ENERGY_ESTIMATE_BOUND: f64 = 0.40;

/// Frozen bound on the worst second-order ratio of the default suite.
pub const HIGHER_ENERGY_ESTIMATE_BOUND: f64 = 0.10;

/// Largest relative change of the worst ratio under `N -> 2N`.
pub const REFINEMENT_TOLERANCE: f64 = 0.05;

/// Worst ratio of a suite against its frozen bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundAudit {
    pub ratios: Vec<f64>,
    pub worst: f64,
    pub bound: f64,
    pub pass: bool,
}

fn sup_over_run<F>(fields: &RunFields, setup: &RunSetup, norm: F) -> Result<f64>
where
    F: Fn(&SolverState) -> Result<f64>,
{
    let cfg = StepperConfig::new(
        setup.s,
        setup.dt,
        Scheme::StrangSplit,
        fields.a.clone(),
        fields.b.clone(),
    )?;
    let start = SolverState::new(fields.u0.clone(), fields.u1.clone(), 0.0)?;
    let stride = setup.stride.max(1);
    let mut sup = 0.0f64;
    let mut probe = |k: usize, st: &SolverState| -> Result<()> {
        if k.is_multiple_of(stride) {
            sup = sup.max(norm(st)?);
        }
        Ok(())
    };
    let end = evolve(&start, &cfg, setup.t_final, &mut [&mut probe])?;
    Ok(sup.max(norm(&end)?))
}

/// `sup_t ||u||_1 / ((1 + |a|_inf)(1 + |b|_inf)(||u0||_{H^s} + ||u1||_{L^2}))`,
/// zero for zero data.
pub fn energy_estimate_ratio(fields: &RunFields, setup: &RunSetup) -> Result<f64> {
    let s = setup.s;
    let data = hs_norm(&fields.u0, s)? + l2_norm(&fields.u1);
    if data == 0.0 {
        return Ok(0.0);
    }
    let coef = (1.0 + fields.a.max_abs()) * (1.0 + fields.b.max_abs());
    let sup = sup_over_run(fields, setup, |st| norm1(&st.u, &st.ut, s))?;
    Ok(sup / (coef * data))
}

/// Same as [`energy_estimate_ratio`] for `||u||_2` and the integrability
/// norms of the coefficients. Needs `d > 2s`.
pub fn higher_energy_estimate_ratio(fields: &RunFields, setup: &RunSetup) -> Result<f64> {
    let s = setup.s;
    let d = setup.grid.dim();
    s.check_subcritical(d)?;
    let p1 = d as f64 / s.get();
    let p2 = d as f64 / (2.0 * s.get());
    let two_s = FracOrder::new(2.0 * s.get())?;
    let data = hs_norm(&fields.u0, two_s)? + hs_norm(&fields.u1, s)?;
    if data == 0.0 {
        return Ok(0.0);
    }
    let coef = (1.0 + lp_norm(&fields.a, p1)?)
        * (1.0 + lp_norm(&fields.a, p2)?)
        * (1.0 + lp_norm(&fields.b, p1)?).powi(2);
    let sup = sup_over_run(fields, setup, |st| norm2(&st.u, &st.ut, s))?;
    Ok(sup / (coef * data))
}

fn audit<F>(runs: &[RandomRun], setup: &RunSetup, bound: f64, ratio: F) -> Result<BoundAudit>
where
    F: Fn(&RunFields, &RunSetup) -> Result<f64> + Sync,
{
    let ratios: Vec<f64> = runs
        .par_iter()
        .map(|run| ratio(&run.fields(&setup.grid)?, setup))
        .collect::<Result<_>>()?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    Ok(BoundAudit {
        worst,
        bound,
        pass: worst <= bound,
        ratios,
    })
}

/// First-order bound over a randomized suite.
pub fn energy_estimate_audit(runs: &[RandomRun], setup: &RunSetup) -> Result<BoundAudit> {
    audit(runs, setup, ENERGY_ESTIMATE_BOUND, energy_estimate_ratio)
}

/// Second-order bound over a randomized suite.
pub fn higher_energy_estimate_audit(runs: &[RandomRun], setup: &RunSetup) -> Result<BoundAudit> {
    setup.s.check_subcritical(setup.grid.dim())?;
    audit(
        runs,
        setup,
        HIGHER_ENERGY_ESTIMATE_BOUND,
        higher_energy_estimate_ratio,
    )
}

/// Relative change `|w_fine / w_coarse - 1|` of the worst ratio.
pub fn refinement_change(coarse: &BoundAudit, fine: &BoundAudit) -> f64 {
    if coarse.worst == 0.0 {
        return if fine.worst == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    (fine.worst / coarse.worst - 1.0).abs()
}

impl BoundAudit {
    /// Verdict of the suite at one grid and its refinement.
    pub fn verdict(&self, study: &str, statement: &str, fine: &BoundAudit) -> Verdict {
        let change = refinement_change(self, fine);
        let pass = self.pass && fine.pass && change < REFINEMENT_TOLERANCE;
        let mut v = Verdict::new(study, pass, statement);
        v.metric("worst_ratio", self.worst)
            .metric("worst_ratio_refined", fine.worst)
            .metric("refinement_change", change)
            .threshold("frozen_bound", self.bound)
            .threshold("refinement_tolerance", REFINEMENT_TOLERANCE);
        v
    }
}
