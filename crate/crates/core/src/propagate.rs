//! Time stepping for `u_tt + (-Delta)^s u + a u + b u_t = 0`.
//!
//! The default scheme is Strang splitting of the first-order system
//! `u' = v, v' = -(-Delta)^s u - a u - b v` into two exactly solvable pieces:
//!
//! * the free flow `u' = v, v' = -(-Delta)^s u`, a rotation of each Fourier bin;
//! * the local kick `u' = 0, v' = -a(x) u - b(x) v`, a damped velocity update
//!   at each grid point.
//!
//! The kick carries no drift, so with `a = b = 0` it is the identity and a
//! step is exactly the free propagator. [`local_flow`] solves the complete
//! pointwise oscillator `v_tt + a v + b v_t = 0` and is kept as a standalone
//! operation; it cannot serve as a splitting factor because its drift would
//! duplicate the one inside the free flow.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fracops::{frac_laplacian, FracOrder};
use crate::grid::{l2_norm, Field, Grid, SpectralField};

/// Ratio of `|b^2 - 4a|` to `max(1, b^2)` below which the local flow uses
/// the Jordan-block exponential.
pub const DEFECTIVE_SWITCH: f64 = 1e-9;

/// CFL safety factor.
pub const CFL_THETA: f64 = 0.5;

/// Norm growth factor that flags a run as unstable.
pub const BLOWUP_FACTOR: f64 = 1e12;

/// `(u, u_t)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub u: Field,
    pub ut: Field,
    pub t: f64,
}

impl SolverState {
    pub fn new(u: Field, ut: Field, t: f64) -> Result<Self> {
        u.ensure_same_grid(&ut)?;
        if !(u.is_finite() && ut.is_finite() && t.is_finite()) {
            return Err(Error::NonFinite("solver state"));
        }
        if t < 0.0 {
            return Err(Error::InvalidTimeStep(format!("negative start time {t}")));
        }
        Ok(SolverState { u, ut, t })
    }

    pub fn zeros(grid: &Grid) -> Self {
        SolverState {
            u: Field::zeros(grid),
            ut: Field::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    fn check_finite(&self) -> Result<()> {
        if self.u.is_finite() && self.ut.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("solver state"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    StrangSplit,
    /// Störmer-Verlet with trapezoidal damping (explicit in the first half kick,
    /// implicit in the second); kept as a cross-check.
    Leapfrog,
}

/// Step size, order, scheme and (fixed) coefficients of a run.
#[derive(Clone, Debug)]
pub struct StepperConfig {
    s: FracOrder,
    dt: f64,
    scheme: Scheme,
    a: Field,
    b: Field,
}

/// Largest step allowed by `dt <= theta / max(|xi_max|^s, sqrt|a|_inf, |b|_inf)`.
pub fn cfl_limit(grid: &Grid, s: FracOrder, a: &Field, b: &Field) -> f64 {
    let rate = grid
        .xi_max()
        .powf(s.get())
        .max(a.max_abs().sqrt())
        .max(b.max_abs());
    CFL_THETA / rate
}

impl StepperConfig {
    pub fn new(s: FracOrder, dt: f64, scheme: Scheme, a: Field, b: Field) -> Result<Self> {
        a.ensure_same_grid(&b)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(format!(
                "dt = {dt} must be positive"
            )));
        }
        if a.min() < 0.0 || b.min() < 0.0 {
            return Err(Error::NegativeCoefficient);
        }
        let limit = cfl_limit(a.grid(), s, &a, &b);
        if dt > limit {
            return Err(Error::InvalidTimeStep(format!(
                "dt = {dt} violates the CFL bound dt <= {limit}"
            )));
        }
        Ok(StepperConfig {
            s,
            dt,
            scheme,
            a,
            b,
        })
    }

    /// Zero coefficients.
    pub fn free(grid: &Grid, s: FracOrder, dt: f64) -> Result<Self> {
        Self::new(
            s,
            dt,
            Scheme::StrangSplit,
            Field::zeros(grid),
            Field::zeros(grid),
        )
    }

    pub fn order(&self) -> FracOrder {
        self.s
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn a(&self) -> &Field {
        &self.a
    }

    pub fn b(&self) -> &Field {
        &self.b
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    /// Same coefficients with another step.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.s, dt, self.scheme, self.a.clone(), self.b.clone())
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// Per-bin propagator of the free flow over a fixed step.
#[derive(Clone, Debug)]
struct FreeTable {
    cos: Vec<f64>,
    sinc: Vec<f64>,
    wsin: Vec<f64>,
}

impl FreeTable {
    fn new(grid: &Grid, s: FracOrder, dt: f64) -> Self {
        let omega = grid.symbol(s.get());
        let n = omega.len();
        let mut t = FreeTable {
            cos: Vec::with_capacity(n),
            sinc: Vec::with_capacity(n),
            wsin: Vec::with_capacity(n),
        };
        for &w in omega.iter() {
            if w == 0.0 {
                t.cos.push(1.0);
                t.sinc.push(dt);
                t.wsin.push(0.0);
            } else {
                let (sn, cs) = (w * dt).sin_cos();
                t.cos.push(cs);
                t.sinc.push(sn / w);
                t.wsin.push(w * sn);
            }
        }
        t
    }

    fn apply(&self, grid: &Grid, u: &mut Field, ut: &mut Field) {
        let mut uh = u.to_complex();
        let mut vh = ut.to_complex();
        grid.forward_in_place(&mut uh);
        grid.forward_in_place(&mut vh);
        for i in 0..uh.len() {
            let (p, q) = (uh[i], vh[i]);
            uh[i] = p * self.cos[i] + q * self.sinc[i];
            vh[i] = q * self.cos[i] - p * self.wsin[i];
        }
        grid.inverse_in_place(&mut uh);
        grid.inverse_in_place(&mut vh);
        write_real(u, &uh);
        write_real(ut, &vh);
    }
}

fn write_real(f: &mut Field, data: &[Complex64]) {
    f.values_mut()
        .iter_mut()
        .zip(data)
        .for_each(|(v, z)| *v = z.re);
}

/// Entries of `exp(dt [[0, 1], [-a, -b]])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalPropagator {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl LocalPropagator {
    /// Exact exponential for `a, b >= 0`, through
    /// `exp(At) = e^{-bt/2} [C(t) I + S(t) (A + b/2 I)]` with `mu^2 = b^2/4 - a`,
    /// `C = cosh(mu t)`, `S = sinh(mu t) / mu` (trigonometric when `mu^2 < 0`,
    /// `C = 1`, `S = t` in the defective case).
    pub fn new(a: f64, b: f64, dt: f64) -> Self {
        if a == 0.0 && b == 0.0 {
            return LocalPropagator {
                m11: 1.0,
                m12: dt,
                m21: 0.0,
                m22: 1.0,
            };
        }
        let disc = b * b - 4.0 * a;
        let half_b = 0.5 * b;
        // (damping * C, damping * S)
        let (c, s) = if disc.abs() < DEFECTIVE_SWITCH * (b * b).max(1.0) {
            let damp = (-half_b * dt).exp();
            (damp, damp * dt)
        } else if disc > 0.0 {
            // Overdamped, roots r1 = -a / (b/2 + mu) and r2 = -(b/2 + mu).
            let mu = 0.5 * disc.sqrt();
            let fast = (-(half_b + mu) * dt).exp();
            let slow = (-a / (half_b + mu) * dt).exp();
            let diff = if 2.0 * mu * dt < 1.0 {
                fast * (2.0 * mu * dt).exp_m1()
            } else {
                slow - fast
            };
            (0.5 * (slow + fast), diff / (2.0 * mu))
        } else {
            let nu = 0.5 * (-disc).sqrt();
            let damp = (-half_b * dt).exp();
            let (sn, cs) = (nu * dt).sin_cos();
            (damp * cs, damp * sn / nu)
        };
        LocalPropagator {
            m11: c + half_b * s,
            m12: s,
            m21: -a * s,
            m22: c - half_b * s,
        }
    }

    #[inline]
    pub fn apply(&self, v: f64, w: f64) -> (f64, f64) {
        (self.m11 * v + self.m12 * w, self.m21 * v + self.m22 * w)
    }
}

/// Exact flow of `u' = 0, v' = -a u - b v + f` (frozen `f`) over a step:
/// `v <- e^{-b dt} v + (1 - e^{-b dt}) / b * (f - a u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalKick {
    pub decay: f64,
    /// `(1 - e^{-b dt}) / b`, equal to `dt` when `b = 0`.
    pub drive: f64,
    pub gain: f64,
}

impl LocalKick {
    pub fn new(a: f64, b: f64, dt: f64) -> Self {
        let drive = if b == 0.0 {
            dt
        } else {
            -(-b * dt).exp_m1() / b
        };
        LocalKick {
            decay: (-b * dt).exp(),
            drive,
            gain: a * drive,
        }
    }

    #[inline]
    pub fn apply(&self, u: f64, v: f64) -> f64 {
        self.decay * v - self.gain * u
    }

    #[inline]
    pub fn apply_forced(&self, u: f64, v: f64, f: f64) -> f64 {
        self.decay * v - self.gain * u + self.drive * f
    }
}

#[derive(Clone, Debug)]
struct KickTable {
    kicks: Vec<LocalKick>,
}

impl KickTable {
    fn new(a: &Field, b: &Field, dt: f64) -> Self {
        KickTable {
            kicks: a
                .values()
                .iter()
                .zip(b.values())
                .map(|(&ai, &bi)| LocalKick::new(ai, bi, dt))
                .collect(),
        }
    }

    fn apply(&self, u: &Field, ut: &mut Field) {
        for ((w, &v), k) in ut.values_mut().iter_mut().zip(u.values()).zip(&self.kicks) {
            *w = k.apply(v, *w);
        }
    }

    fn apply_forced(&self, u: &Field, ut: &mut Field, f: &Field) {
        let it = ut.values_mut().iter_mut().zip(u.values()).zip(f.values());
        for (((w, &v), &g), k) in it.zip(&self.kicks) {
            *w = k.apply_forced(v, *w, g);
        }
    }
}

#[derive(Clone, Debug)]
struct LocalTable {
    props: Vec<LocalPropagator>,
}

impl LocalTable {
    fn new(a: &Field, b: &Field, dt: f64) -> Self {
        LocalTable {
            props: a
                .values()
                .iter()
                .zip(b.values())
                .map(|(&ai, &bi)| LocalPropagator::new(ai, bi, dt))
                .collect(),
        }
    }

    fn apply(&self, u: &mut Field, ut: &mut Field) {
        let uv = u.values_mut();
        let wv = ut.values_mut();
        for ((v, w), p) in uv.iter_mut().zip(wv.iter_mut()).zip(&self.props) {
            let (nv, nw) = p.apply(*v, *w);
            *v = nv;
            *w = nw;
        }
    }
}

/// Exact free flow over `dt` (any sign).
pub fn free_flow(state: &SolverState, dt: f64, s: FracOrder) -> Result<SolverState> {
    state.check_finite()?;
    let grid = state.grid().clone();
    let mut next = state.clone();
    FreeTable::new(&grid, s, dt).apply(&grid, &mut next.u, &mut next.ut);
    next.t += dt;
    Ok(next)
}

/// Exact pointwise flow of `v_tt + a v + b v_t = 0` over `dt`. Leaves `t`
/// unchanged, as a splitting factor.
pub fn local_flow(state: &SolverState, dt: f64, a: &Field, b: &Field) -> Result<SolverState> {
    state.check_finite()?;
    state.u.ensure_same_grid(a)?;
    a.ensure_same_grid(b)?;
    if a.min() < 0.0 || b.min() < 0.0 {
        return Err(Error::NegativeCoefficient);
    }
    let mut next = state.clone();
    LocalTable::new(a, b, dt).apply(&mut next.u, &mut next.ut);
    Ok(next)
}

/// Exact local kick over `dt`, the splitting factor of [`strang_step`].
/// Leaves `u` and `t` unchanged.
pub fn local_kick(state: &SolverState, dt: f64, a: &Field, b: &Field) -> Result<SolverState> {
    state.check_finite()?;
    state.u.ensure_same_grid(a)?;
    a.ensure_same_grid(b)?;
    if a.min() < 0.0 || b.min() < 0.0 {
        return Err(Error::NegativeCoefficient);
    }
    let mut next = state.clone();
    KickTable::new(a, b, dt).apply(&next.u, &mut next.ut);
    Ok(next)
}

/// Reusable stepper with precomputed propagator tables.
#[derive(Clone, Debug)]
pub struct Stepper {
    cfg: StepperConfig,
    free: Option<FreeTable>,
    kick_half: Option<KickTable>,
    b_half: Vec<f64>,
}

impl Stepper {
    pub fn new(cfg: &StepperConfig) -> Self {
        let grid = cfg.grid();
        match cfg.scheme {
            Scheme::StrangSplit => Stepper {
                cfg: cfg.clone(),
                free: Some(FreeTable::new(grid, cfg.s, cfg.dt)),
                kick_half: Some(KickTable::new(&cfg.a, &cfg.b, 0.5 * cfg.dt)),
                b_half: Vec::new(),
            },
            Scheme::Leapfrog => Stepper {
                cfg: cfg.clone(),
                free: None,
                kick_half: None,
                b_half: cfg.b.values().iter().map(|&b| 0.5 * cfg.dt * b).collect(),
            },
        }
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// Advances `state` by one step in place.
    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        state.u.ensure_same_grid(&self.cfg.a)?;
        match self.cfg.scheme {
            Scheme::StrangSplit => {
                let kick = self.kick_half.as_ref().expect("strang tables");
                let free = self.free.as_ref().expect("strang tables");
                kick.apply(&state.u, &mut state.ut);
                free.apply(self.cfg.grid(), &mut state.u, &mut state.ut);
                kick.apply(&state.u, &mut state.ut);
            }
            Scheme::Leapfrog => self.verlet(state)?,
        }
        state.t += self.cfg.dt;
        state.check_finite()
    }

    /// Advances `state` by one step of `u_tt + (-Delta)^s u + a u + b u_t = f`,
    /// given the source at the start and at the end of the step. Each half
    /// kick freezes the source at its own end of the step.
    pub fn step_forced(
        &self,
        state: &mut SolverState,
        f_start: &Field,
        f_end: &Field,
    ) -> Result<()> {
        state.u.ensure_same_grid(f_start)?;
        state.u.ensure_same_grid(f_end)?;
        match self.cfg.scheme {
            Scheme::StrangSplit => {
                let kick = self.kick_half.as_ref().expect("strang tables");
                let free = self.free.as_ref().expect("strang tables");
                kick.apply_forced(&state.u, &mut state.ut, f_start);
                free.apply(self.cfg.grid(), &mut state.u, &mut state.ut);
                kick.apply_forced(&state.u, &mut state.ut, f_end);
            }
            Scheme::Leapfrog => self.verlet_with(state, Some((f_start, f_end)))?,
        }
        state.t += self.cfg.dt;
        state.check_finite()
    }

    fn verlet(&self, state: &mut SolverState) -> Result<()> {
        self.verlet_with(state, None)
    }

    fn verlet_with(&self, state: &mut SolverState, source: Option<(&Field, &Field)>) -> Result<()> {
        let dt = self.cfg.dt;
        let a = self.cfg.a.values();
        let src = |end: bool, i: usize| match source {
            Some((f0, f1)) => {
                if end {
                    f1.values()[i]
                } else {
                    f0.values()[i]
                }
            }
            None => 0.0,
        };
        let ku = frac_laplacian(&state.u, self.cfg.s.get())?;
        {
            let u = state.u.values();
            let ut = state.ut.values_mut();
            for i in 0..ut.len() {
                let force = -ku.values()[i] - a[i] * u[i] + src(false, i);
                ut[i] = ut[i] * (1.0 - self.b_half[i]) + 0.5 * dt * force;
            }
        }
        state.u.axpy(dt, &state.ut)?;
        let ku = frac_laplacian(&state.u, self.cfg.s.get())?;
        let u = state.u.values();
        let ut = state.ut.values_mut();
        for i in 0..ut.len() {
            let force = -ku.values()[i] - a[i] * u[i] + src(true, i);
            ut[i] = (ut[i] + 0.5 * dt * force) / (1.0 + self.b_half[i]);
        }
        Ok(())
    }
}

/// One step of the configured scheme: for Strang splitting,
/// `kick(dt/2) . free(dt) . kick(dt/2)`.
pub fn strang_step(state: &SolverState, cfg: &StepperConfig) -> Result<SolverState> {
    let mut next = state.clone();
    Stepper::new(cfg).step(&mut next)?;
    Ok(next)
}

/// Closed-form solution of `u'' + b0 u' + (|xi|^{2s} + a0) u = 0` per bin,
/// returning `(u_hat(t), u_t_hat(t))`.
pub fn modal_oracle(
    u0_hat: &SpectralField,
    u1_hat: &SpectralField,
    a0: f64,
    b0: f64,
    s: FracOrder,
    t: f64,
) -> Result<(SpectralField, SpectralField)> {
    if u0_hat.grid() != u1_hat.grid() {
        return Err(Error::GridMismatch);
    }
    if a0 < 0.0 || b0 < 0.0 {
        return Err(Error::NegativeCoefficient);
    }
    let grid = u0_hat.grid();
    let w2 = grid.symbol(2.0 * s.get());
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::with_capacity(grid.len());
    for ((&p, &q), &w2) in u0_hat.coeffs().iter().zip(u1_hat.coeffs()).zip(w2.iter()) {
        let (x, y) = damped_mode(p, q, w2 + a0, b0, t);
        u.push(x);
        v.push(y);
    }
    Ok((SpectralField::new(grid, u)?, SpectralField::new(grid, v)?))
}

/// `y'' + b y' + k y = 0` from `(y0, y1)`, by the roots of `r^2 + b r + k`.
fn damped_mode(y0: Complex64, y1: Complex64, k: f64, b: f64, t: f64) -> (Complex64, Complex64) {
    let disc = 0.25 * b * b - k;
    let scale = (0.25 * b * b).max(k).max(1.0);
    if disc.abs() <= 1e-14 * scale {
        let r = -0.5 * b;
        let e = (r * t).exp();
        let c = y1 - y0 * r;
        let y = (y0 + c * t) * e;
        (y, y * r + c * e)
    } else if disc > 0.0 {
        let mu = disc.sqrt();
        let r1 = -0.5 * b + mu;
        let r2 = -0.5 * b - mu;
        let c1 = (y1 - y0 * r2) / (r1 - r2);
        let c2 = (y0 * r1 - y1) / (r1 - r2);
        let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
        (c1 * e1 + c2 * e2, c1 * r1 * e1 + c2 * r2 * e2)
    } else {
        let nu = (-disc).sqrt();
        let r = -0.5 * b;
        let e = (r * t).exp();
        let (sn, cs) = (nu * t).sin_cos();
        // y = e^{rt} (A cos + B sin), A = y0, B = (y1 - r y0) / nu
        let bcoef = (y1 - y0 * r) / nu;
        let y = (y0 * cs + bcoef * sn) * e;
        let dy = y * r + (bcoef * cs - y0 * sn) * (nu * e);
        (y, dy)
    }
}

/// Callback invoked after every step (and once before the first).
pub trait Observer {
    fn observe(&mut self, step: usize, state: &SolverState) -> Result<()>;
}

impl<F: FnMut(usize, &SolverState) -> Result<()>> Observer for F {
    fn observe(&mut self, step: usize, state: &SolverState) -> Result<()> {
        self(step, state)
    }
}

/// Keeps a copy of the state every `stride` steps.
#[derive(Clone, Debug)]
pub struct Snapshots {
    pub stride: usize,
    pub states: Vec<SolverState>,
}

impl Snapshots {
    pub fn new(stride: usize) -> Self {
        Snapshots {
            stride: stride.max(1),
            states: Vec::new(),
        }
    }
}

impl Observer for Snapshots {
    fn observe(&mut self, step: usize, state: &SolverState) -> Result<()> {
        if step.is_multiple_of(self.stride) {
            self.states.push(state.clone());
        }
        Ok(())
    }
}

/// Default observer stride in steps.
pub const DEFAULT_STRIDE: usize = 10;

/// Number of steps of size `dt` covering `duration`; `dt` must divide it
/// to within `1e-12`.
pub fn step_count(duration: f64, dt: f64) -> Result<usize> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidTimeStep(format!("duration {duration}")));
    }
    let steps = (duration / dt).round();
    if (steps * dt - duration).abs() > 1e-12 * duration.max(1.0) {
        return Err(Error::InvalidTimeStep(format!(
            "dt = {dt} does not divide T = {duration}"
        )));
    }
    Ok(steps as usize)
}

/// Integrates over `[t0, t0 + duration]`, calling every observer at step 0
/// and after each step.
pub fn evolve(
    state: &SolverState,
    cfg: &StepperConfig,
    duration: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<SolverState> {
    let steps = step_count(duration, cfg.dt)?;
    let stepper = Stepper::new(cfg);
    let mut cur = state.clone();
    let t0 = cur.t;
    let start = l2_norm(&cur.u) + l2_norm(&cur.ut);
    let limit = BLOWUP_FACTOR * start;
    for obs in observers.iter_mut() {
        obs.observe(0, &cur)?;
    }
    for k in 1..=steps {
        stepper.step(&mut cur)?;
        cur.t = t0 + k as f64 * cfg.dt;
        let norm = l2_norm(&cur.u) + l2_norm(&cur.ut);
        if norm > limit && start > 0.0 {
            return Err(Error::Unstable {
                t: cur.t,
                norm,
                limit,
            });
        }
        for obs in observers.iter_mut() {
            obs.observe(k, &cur)?;
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{forward, inverse};
    use std::f64::consts::PI;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    #[test]
    fn local_propagator_branches() {
        // a = b = 0: drift.
        let p = LocalPropagator::new(0.0, 0.0, 0.3);
        assert_eq!(p.apply(1.0, 2.0), (1.6, 2.0));
        // Harmonic oscillator.
        let (v, w) = LocalPropagator::new(1.0, 0.0, 0.7).apply(1.0, 0.0);
        assert!((v - 0.7f64.cos()).abs() < 1e-15 && (w + 0.7f64.sin()).abs() < 1e-15);
        // Pure damping of the velocity.
        let (v, w) = LocalPropagator::new(0.0, 3.0, 0.2).apply(0.0, 1.0);
        assert!((w - (-0.6f64).exp()).abs() < 1e-15);
        assert!((v - (1.0 - (-0.6f64).exp()) / 3.0).abs() < 1e-15);
        // Critical damping b^2 = 4a: v = (1 + t) e^{-t} for a = 1, b = 2.
        let (v, w) = LocalPropagator::new(1.0, 2.0, 0.5).apply(1.0, 0.0);
        assert!((v - 1.5 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((w + 0.5 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn local_propagator_is_continuous_across_the_switch() {
        let b = 2.0;
        let exact = LocalPropagator::new(1.0, b, 0.4);
        for delta in [1e-6, 1e-8, -1e-8, -1e-6] {
            let near = LocalPropagator::new(1.0 + delta, b, 0.4);
            assert!((near.m11 - exact.m11).abs() < 1e-6);
            assert!((near.m12 - exact.m12).abs() < 1e-6);
            assert!((near.m21 - exact.m21).abs() < 1e-6);
            assert!((near.m22 - exact.m22).abs() < 1e-6);
        }
    }

    #[test]
    fn local_propagator_survives_stiff_damping() {
        let p = LocalPropagator::new(1.0, 1e6, 1.0);
        assert!(p.m11.is_finite() && p.m12.is_finite() && p.m21.is_finite() && p.m22.is_finite());
        assert!(p.m22.abs() < 1e-12);
    }

    #[test]
    fn local_flow_rejects_negative() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let st = SolverState::zeros(&g);
        let neg = Field::constant(&g, -1.0);
        let z = Field::zeros(&g);
        assert!(matches!(
            local_flow(&st, 0.1, &neg, &z),
            Err(Error::NegativeCoefficient)
        ));
    }

    #[test]
    fn free_flow_single_mode() {
        let g = Grid::new(1, 32, PI).unwrap();
        let k = 3.0;
        let s = order(0.7);
        let u0 = Field::from_fn(&g, |x| (k * x[0]).cos()).unwrap();
        let st = SolverState::new(u0.clone(), Field::zeros(&g), 0.0).unwrap();
        let dt = 0.37;
        let out = free_flow(&st, dt, s).unwrap();
        let w = k.powf(0.7);
        for (a, b) in out.u.values().iter().zip(u0.values()) {
            assert!((a - (w * dt).cos() * b).abs() < 1e-14);
        }
        assert!((out.t - dt).abs() < 1e-16);
    }

    #[test]
    fn free_flow_zero_bin_drifts() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let st = SolverState::new(Field::constant(&g, 1.0), Field::constant(&g, 2.0), 0.0).unwrap();
        let out = free_flow(&st, 0.25, order(0.5)).unwrap();
        assert!(out.u.values().iter().all(|v| (v - 1.5).abs() < 1e-14));
        assert!(out.ut.values().iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn free_flow_conserves_modal_energy() {
        let g = Grid::new(1, 64, 2.0).unwrap();
        let s = order(0.4);
        let u = Field::from_fn(&g, |x| (-(x[0] * x[0]) * 4.0).exp()).unwrap();
        let ut = Field::from_fn(&g, |x| x[0] * (-(x[0] * x[0]) * 3.0).exp()).unwrap();
        let st = SolverState::new(u, ut, 0.0).unwrap();
        let out = free_flow(&st, 0.9, s).unwrap();
        let w2 = g.symbol(0.8);
        let (u0, v0) = (forward(&st.u).unwrap(), forward(&st.ut).unwrap());
        let (u1, v1) = (forward(&out.u).unwrap(), forward(&out.ut).unwrap());
        let energy = |p: &SpectralField, q: &SpectralField, i: usize| {
            q.coeffs()[i].norm_sqr() + w2[i] * p.coeffs()[i].norm_sqr()
        };
        let scale = (0..g.len())
            .map(|i| energy(&u0, &v0, i))
            .fold(0.0, f64::max);
        for i in 0..g.len() {
            if w2[i] == 0.0 {
                continue;
            }
            let (e0, e1) = (energy(&u0, &v0, i), energy(&u1, &v1, i));
            assert!((e0 - e1).abs() <= 1e-12 * scale, "{e0} {e1}");
        }
    }

    #[test]
    fn kick_limits() {
        let k = LocalKick::new(0.0, 0.0, 0.4);
        assert_eq!(k.apply(3.0, 2.0), 2.0);
        let k = LocalKick::new(2.0, 0.0, 0.5);
        assert_eq!(k.apply(1.0, 0.0), -1.0);
        let k = LocalKick::new(0.0, 2.0, 0.5);
        assert!((k.apply(5.0, 1.0) - (-1.0f64).exp()).abs() < 1e-16);
        let g = Grid::new(1, 8, 1.0).unwrap();
        let st = SolverState::new(Field::constant(&g, 1.0), Field::zeros(&g), 0.0).unwrap();
        let out = local_kick(&st, 0.5, &Field::constant(&g, 2.0), &Field::zeros(&g)).unwrap();
        assert_eq!(out.u, st.u);
        assert!(out.ut.values().iter().all(|&v| v == -1.0));
    }

    #[test]
    fn free_flow_reverses() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let u = Field::from_fn(&g, |x| (x[0] * 1.3).sin() * (x[1] * 0.7).cos()).unwrap();
        let ut = Field::from_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let st = SolverState::new(u, ut, 0.0).unwrap();
        let s = order(0.8);
        let back = free_flow(&free_flow(&st, 0.3, s).unwrap(), -0.3, s).unwrap();
        let err = l2_norm(&back.u.sub(&st.u).unwrap()) + l2_norm(&back.ut.sub(&st.ut).unwrap());
        assert!(err < 1e-12 * (l2_norm(&st.u) + l2_norm(&st.ut)));
    }

    #[test]
    fn strang_without_coefficients_is_the_free_flow() {
        let g = Grid::new(1, 64, PI).unwrap();
        let s = order(0.6);
        let cfg = StepperConfig::free(&g, s, 0.05).unwrap();
        let u = Field::from_fn(&g, |x| (-(x[0] * x[0])).exp()).unwrap();
        let st = SolverState::new(u, Field::zeros(&g), 0.0).unwrap();
        let a = strang_step(&st, &cfg).unwrap();
        let b = free_flow(&st, 0.05, s).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.ut, b.ut);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::new(1, 32, 2.0).unwrap();
        let a = Field::from_fn(&g, |x| 1.0 + x[0].cos()).unwrap();
        let b = Field::constant(&g, 0.5);
        let cfg = StepperConfig::new(order(0.5), 0.01, Scheme::StrangSplit, a, b).unwrap();
        let out = evolve(&SolverState::zeros(&g), &cfg, 1.0, &mut []).unwrap();
        assert_eq!(out.u.max_abs(), 0.0);
        assert_eq!(out.ut.max_abs(), 0.0);
    }

    #[test]
    fn evolve_zero_duration() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let cfg = StepperConfig::free(&g, order(0.5), 0.01).unwrap();
        let st = SolverState::new(Field::constant(&g, 1.0), Field::zeros(&g), 0.0).unwrap();
        assert_eq!(evolve(&st, &cfg, 0.0, &mut []).unwrap(), st);
    }

    #[test]
    fn step_count_requires_divisibility() {
        assert_eq!(step_count(1.0, 0.01).unwrap(), 100);
        assert!(step_count(1.0, 0.3).is_err());
    }

    #[test]
    fn cfl_is_enforced() {
        let g = Grid::new(1, 64, PI).unwrap();
        let s = order(1.0);
        // xi_max = 32 -> dt <= 1/64.
        assert!(StepperConfig::free(&g, s, 1.0 / 64.0).is_ok());
        assert!(matches!(
            StepperConfig::free(&g, s, 0.02),
            Err(Error::InvalidTimeStep(_))
        ));
    }

    #[test]
    fn modal_oracle_limits() {
        let g = Grid::new(1, 16, PI).unwrap();
        let s = order(0.5);
        let u1 = Field::constant(&g, 1.0);
        let (u0h, u1h) = (forward(&Field::zeros(&g)).unwrap(), forward(&u1).unwrap());
        let b0 = 2.0;
        let t = 0.8;
        let (uh, vh) = modal_oracle(&u0h, &u1h, 0.0, b0, s, t).unwrap();
        let u = inverse(&uh).unwrap();
        let v = inverse(&vh).unwrap();
        let expect = (1.0 - (-b0 * t).exp()) / b0;
        assert!(u.values().iter().all(|x| (x - expect).abs() < 1e-14));
        assert!(v
            .values()
            .iter()
            .all(|x| (x - (-b0 * t).exp()).abs() < 1e-14));

        // a0 = b0 = 0 reduces to cos / sin over omega.
        let k: f64 = 2.0;
        let f0 = Field::from_fn(&g, |x| (k * x[0]).cos()).unwrap();
        let (uh, _) = modal_oracle(
            &forward(&f0).unwrap(),
            &forward(&Field::zeros(&g)).unwrap(),
            0.0,
            0.0,
            s,
            t,
        )
        .unwrap();
        let u = inverse(&uh).unwrap();
        let c = (t * k.sqrt()).cos();
        for (a, b) in u.values().iter().zip(f0.values()) {
            assert!((a - c * b).abs() < 1e-14);
        }
    }

    #[test]
    fn modal_oracle_undamped_energy() {
        let g = Grid::new(1, 32, 2.0).unwrap();
        let s = order(0.3);
        let u0 = Field::from_fn(&g, |x| (-(x[0] * x[0]) * 2.0).exp()).unwrap();
        let u1 = Field::from_fn(&g, |x| (x[0] * PI).sin()).unwrap();
        let (p, q) = (forward(&u0).unwrap(), forward(&u1).unwrap());
        let a0 = 0.7;
        let (uh, vh) = modal_oracle(&p, &q, a0, 0.0, s, 2.3).unwrap();
        let w2 = g.symbol(0.6);
        for i in 0..g.len() {
            let k = w2[i] + a0;
            let e0 = q.coeffs()[i].norm_sqr() + k * p.coeffs()[i].norm_sqr();
            let e1 = vh.coeffs()[i].norm_sqr() + k * uh.coeffs()[i].norm_sqr();
            assert!((e0 - e1).abs() <= 1e-12 * e0 + 1e-30);
        }
    }

    #[test]
    fn leapfrog_tracks_strang() {
        let g = Grid::new(1, 64, PI).unwrap();
        let s = order(0.5);
        let a = Field::from_fn(&g, |x| 1.0 + 0.5 * x[0].cos()).unwrap();
        let b = Field::from_fn(&g, |x| 0.3 + 0.2 * (2.0 * x[0]).sin()).unwrap();
        let u0 = Field::from_fn(&g, |x| (-(x[0] * x[0])).exp()).unwrap();
        let st = SolverState::new(u0, Field::zeros(&g), 0.0).unwrap();
        // Both schemes are second order, so their gap shrinks fourfold per halving.
        let gap = |dt: f64| {
            let cfg = StepperConfig::new(s, dt, Scheme::StrangSplit, a.clone(), b.clone()).unwrap();
            let x = evolve(&st, &cfg, 1.0, &mut []).unwrap();
            let y = evolve(
                &st,
                &cfg.clone().with_scheme(Scheme::Leapfrog),
                1.0,
                &mut [],
            )
            .unwrap();
            l2_norm(&x.u.sub(&y.u).unwrap()) / l2_norm(&x.u)
        };
        let (coarse, fine) = (gap(1e-2), gap(5e-3));
        assert!(coarse < 1e-2, "{coarse}");
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn snapshots_follow_stride() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let cfg = StepperConfig::free(&g, order(0.5), 0.01).unwrap();
        let st = SolverState::new(Field::constant(&g, 1.0), Field::zeros(&g), 0.0).unwrap();
        let mut snaps = Snapshots::new(DEFAULT_STRIDE);
        evolve(&st, &cfg, 0.5, &mut [&mut snaps]).unwrap();
        assert_eq!(snaps.states.len(), 6);
        assert!((snaps.states[5].t - 0.5).abs() < 1e-15);
    }
}
