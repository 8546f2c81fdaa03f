//! Nonhomogeneous problems `u_tt + (-Delta)^s u + a u + b u_t = f(t, x)`.
//!
//! [`duhamel_solve`] builds the solution as the homogeneous flow of the data
//! plus a trapezoid-rule superposition of homogeneous flows launched from
//! each source time with data `(0, f(tau))`. [`direct_source_solve`] folds
//! the source into the splitting kicks instead; comparing the two is the
//! point of [`duhamel_equivalence`].

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{l2_norm, Field, Grid};
use crate::propagate::{evolve, step_count, SolverState, Stepper, StepperConfig};

type SourceFn = dyn Fn(f64, &Grid) -> Result<Field> + Send + Sync;

/// A time-dependent source `f(t, .)`.
#[derive(Clone)]
pub struct SourceTerm {
    evaluator: Option<Arc<SourceFn>>,
    tag: String,
}

impl fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceTerm")
            .field("tag", &self.tag)
            .finish()
    }
}

impl SourceTerm {
    pub fn new<F>(tag: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(f64, &Grid) -> Result<Field> + Send + Sync + 'static,
    {
        SourceTerm {
            evaluator: Some(Arc::new(evaluator)),
            tag: tag.into(),
        }
    }

    pub fn zero() -> Self {
        SourceTerm {
            evaluator: None,
            tag: "zero".into(),
        }
    }

    /// `f(t, x) = g(t) h(x)`.
    pub fn separable<G>(tag: impl Into<String>, profile: Field, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        SourceTerm::new(tag, move |t, grid| {
            if profile.grid() != grid {
                return Err(Error::GridMismatch);
            }
            Ok(profile.scaled(g(t)))
        })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn is_zero(&self) -> bool {
        self.evaluator.is_none()
    }

    pub fn evaluate(&self, t: f64, grid: &Grid) -> Result<Field> {
        match &self.evaluator {
            None => Ok(Field::zeros(grid)),
            Some(f) => {
                let out = f(t, grid)?;
                if out.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                if !out.is_finite() {
                    return Err(Error::NonFinite("source term"));
                }
                Ok(out)
            }
        }
    }
}

/// Steps of the time grid used as quadrature nodes, `round(m (steps / (M - 1)))`.
fn node_steps(steps: usize, m: usize) -> Vec<usize> {
    (0..m)
        .map(|i| ((i * steps) as f64 / (m - 1) as f64).round() as usize)
        .collect()
}

/// Trapezoid weights on (possibly uneven) nodes.
fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; nodes.len()];
    for (i, pair) in nodes.windows(2).enumerate() {
        let half = 0.5 * (pair[1] - pair[0]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

/// Solution at `T` of the forced problem with data `(u0, u1)` at `t = 0`,
/// through Duhamel superposition over `M` quadrature nodes.
pub fn duhamel_solve(
    u0: &Field,
    u1: &Field,
    cfg: &StepperConfig,
    source: &SourceTerm,
    t_final: f64,
    m: usize,
) -> Result<SolverState> {
    if m < 3 {
        return Err(Error::QuadratureUnderResolved(m));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidTimeStep(format!(
            "T = {t_final} must be positive"
        )));
    }
    let steps = step_count(t_final, cfg.dt())?;
    let start = SolverState::new(u0.clone(), u1.clone(), 0.0)?;
    let w = evolve(&start, cfg, t_final, &mut [])?;
    if source.is_zero() {
        return Ok(w);
    }

    let grid = cfg.grid();
    let dt = cfg.dt();
    let ks = node_steps(steps, m);
    let taus: Vec<f64> = ks.iter().map(|&k| k as f64 * dt).collect();
    let weights = trapezoid_weights(&taus);

    let solves: Vec<Option<SolverState>> = ks
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&k, &wt)| {
            if wt == 0.0 {
                return Ok(None);
            }
            let tau = k as f64 * dt;
            let kick = source.evaluate(tau, grid)?;
            let start = SolverState::new(Field::zeros(grid), kick, tau)?;
            let remaining = (steps - k) as f64 * dt;
            evolve(&start, cfg, remaining, &mut []).map(Some)
        })
        .collect::<Result<_>>()?;

    let mut u = w.u;
    let mut ut = w.ut;
    for (v, &wt) in solves.iter().zip(&weights) {
        if let Some(v) = v {
            u.axpy(wt, &v.u)?;
            ut.axpy(wt, &v.ut)?;
        }
    }
    SolverState::new(u, ut, w.t)
}

/// Solution at `T` of the forced problem by stepping with the source folded
/// into the local kicks. A zero source reproduces [`evolve`] exactly.
pub fn direct_source_solve(
    u0: &Field,
    u1: &Field,
    cfg: &StepperConfig,
    source: &SourceTerm,
    t_final: f64,
) -> Result<SolverState> {
    let start = SolverState::new(u0.clone(), u1.clone(), 0.0)?;
    if source.is_zero() {
        return evolve(&start, cfg, t_final, &mut []);
    }
    let steps = step_count(t_final, cfg.dt())?;
    let grid = cfg.grid();
    let dt = cfg.dt();
    let stepper = Stepper::new(cfg);
    let mut cur = start;
    let mut f_prev = source.evaluate(0.0, grid)?;
    for k in 1..=steps {
        let t = k as f64 * dt;
        let f_next = source.evaluate(t, grid)?;
        stepper.step_forced(&mut cur, &f_prev, &f_next)?;
        cur.t = t;
        f_prev = f_next;
    }
    Ok(cur)
}

/// Outcome of the Duhamel / direct-stepping comparison.
///
/// With `h = T / (M - 1)`, the gap between the two solutions is modelled as
/// `C1 dt^2 + C2 h^2`. `C1` is estimated from the change of the gap when
/// `dt` halves at fixed `M`, and `C2` from the change of the Duhamel
/// solution when `h` halves at fixed `dt`; each is estimated twice, on
/// successive refinements.
#[derive(Clone, Debug, PartialEq)]
pub struct DuhamelCheck {
    pub dt: f64,
    pub m: usize,
    /// `||duhamel - direct||_{L^2}` at `(dt, M)`.
    pub gap: f64,
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    /// `C1 dt^2 + C2 h^2` with the larger estimate of each constant.
    pub tolerance: f64,
}

/// Ratio band within which successive constant estimates count as stable.
pub const STABILITY_BAND: (f64, f64) = (0.8, 1.25);

impl DuhamelCheck {
    pub fn c1_ratio(&self) -> f64 {
        self.c1[1] / self.c1[0]
    }

    pub fn c2_ratio(&self) -> f64 {
        self.c2[1] / self.c2[0]
    }

    fn stable(r: f64) -> bool {
        (STABILITY_BAND.0..=STABILITY_BAND.1).contains(&r)
    }

    pub fn within_tolerance(&self) -> bool {
        self.gap <= self.tolerance
    }

    pub fn constants_stable(&self) -> bool {
        Self::stable(self.c1_ratio()) && Self::stable(self.c2_ratio())
    }

    pub fn pass(&self) -> bool {
        self.within_tolerance() && self.constants_stable()
    }
}

/// Compares [`duhamel_solve`] with [`direct_source_solve`] at `(dt, M)` and
/// on the refinements `dt/2, dt/4` and `2(M-1)+1, 4(M-1)+1` nodes.
pub fn duhamel_equivalence(
    u0: &Field,
    u1: &Field,
    cfg: &StepperConfig,
    source: &SourceTerm,
    t_final: f64,
    m: usize,
) -> Result<DuhamelCheck> {
    if m < 3 {
        return Err(Error::QuadratureUnderResolved(m));
    }
    let dt = cfg.dt();
    let duh = |c: &StepperConfig, nodes: usize| duhamel_solve(u0, u1, c, source, t_final, nodes);
    let dir = |c: &StepperConfig| direct_source_solve(u0, u1, c, source, t_final);
    let gap_field = |c: &StepperConfig| -> Result<Field> { duh(c, m)?.u.sub(&dir(c)?.u) };

    let cfgs = [cfg.clone(), cfg.with_dt(0.5 * dt)?, cfg.with_dt(0.25 * dt)?];
    let gaps: Vec<Field> = cfgs.iter().map(gap_field).collect::<Result<_>>()?;
    let mut c1 = [0.0; 2];
    for i in 0..2 {
        let h = dt / (1 << i) as f64;
        c1[i] = l2_norm(&gaps[i].sub(&gaps[i + 1])?) / (0.75 * h * h);
    }

    let fine = &cfgs[2];
    let nodes = [m, 2 * (m - 1) + 1, 4 * (m - 1) + 1];
    let sols: Vec<Field> = nodes
        .iter()
        .map(|&n| duh(fine, n).map(|s| s.u))
        .collect::<Result<_>>()?;
    let mut c2 = [0.0; 2];
    for i in 0..2 {
        let h = t_final / (nodes[i] - 1) as f64;
        c2[i] = l2_norm(&sols[i].sub(&sols[i + 1])?) / (0.75 * h * h);
    }

    let h = t_final / (m - 1) as f64;
    let gap = l2_norm(&gaps[0]);
    let tolerance = c1[0].max(c1[1]) * dt * dt + c2[0].max(c2[1]) * h * h;
    Ok(DuhamelCheck {
        dt,
        m,
        gap,
        c1,
        c2,
        tolerance,
    })
}
