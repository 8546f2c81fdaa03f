//! Energy functional, dissipation bookkeeping and the energy-law audit.

use crate::error::{Error, Result};
use crate::fit::convergence_order;
use crate::fracops::{frac_seminorm_spectral, norm1, norm2, FracOrder};
use crate::grid::{l2_norm, Field};
use crate::propagate::{evolve, Observer, SolverState, StepperConfig};
use crate::sum::pairwise_zip_sum;

use super::Verdict;

/// Energy overshoot allowed at step `dt` is `ENERGY_BAND_COEFF * dt^2`
/// relative to `E(0)`.
pub const ENERGY_BAND_COEFF: f64 = 1.0;

/// Step at which the overshoot band equals `1e-8`.
pub const DEFAULT_DT: f64 = 1e-4;

/// Smallest acceptable order of the dissipation-identity residual.
pub const RESIDUAL_ORDER_MIN: f64 = 1.9;

/// One sample of the energy monitor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    /// `||u_t||^2 + ||(-Delta)^{s/2} u||^2 + ||a^{1/2} u||^2`.
    pub energy: f64,
    /// `2 int_0^t ||b^{1/2} u_t||^2`.
    pub dissipated: f64,
    pub norm1: f64,
    pub norm2: f64,
    pub l2_u: f64,
    pub l2_ut: f64,
    pub linf_u: f64,
    pub linf_ut: f64,
}

impl EnergyRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.energy,
            self.dissipated,
            self.norm1,
            self.norm2,
            self.l2_u,
            self.l2_ut,
            self.linf_u,
            self.linf_ut,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// `E(t)` of a state.
pub fn energy(state: &SolverState, a: &Field, s: FracOrder) -> Result<f64> {
    state.u.ensure_same_grid(a)?;
    let h = state.grid().cell_volume();
    let kin = l2_norm(&state.ut).powi(2);
    let pot = frac_seminorm_spectral(&state.u, s)?.powi(2);
    let mass = h * pairwise_zip_sum(a.values(), state.u.values(), |ai, ui| ai * ui * ui);
    Ok(kin + pot + mass)
}

/// `2 ||b^{1/2} u_t||^2`, the instantaneous dissipation rate.
pub fn dissipation_rate(ut: &Field, b: &Field) -> Result<f64> {
    ut.ensure_same_grid(b)?;
    let h = ut.grid().cell_volume();
    Ok(2.0 * h * pairwise_zip_sum(b.values(), ut.values(), |bi, vi| bi * vi * vi))
}

/// Observer that records energies every `stride` steps while integrating the
/// dissipation rate at every step with the trapezoid rule.
#[derive(Clone, Debug)]
pub struct EnergyMonitor {
    a: Field,
    b: Field,
    s: FracOrder,
    dt: f64,
    stride: usize,
    last_rate: f64,
    dissipated: f64,
    pub records: Vec<EnergyRecord>,
}

impl EnergyMonitor {
    pub fn new(cfg: &StepperConfig, stride: usize) -> Self {
        EnergyMonitor {
            a: cfg.a().clone(),
            b: cfg.b().clone(),
            s: cfg.order(),
            dt: cfg.dt(),
            stride: stride.max(1),
            last_rate: 0.0,
            dissipated: 0.0,
            records: Vec::new(),
        }
    }

    fn record(&self, state: &SolverState) -> Result<EnergyRecord> {
        Ok(EnergyRecord {
            t: state.t,
            energy: energy(state, &self.a, self.s)?,
            dissipated: self.dissipated,
            norm1: norm1(&state.u, &state.ut, self.s)?,
            norm2: norm2(&state.u, &state.ut, self.s)?,
            l2_u: l2_norm(&state.u),
            l2_ut: l2_norm(&state.ut),
            linf_u: state.u.max_abs(),
            linf_ut: state.ut.max_abs(),
        })
    }
}

impl Observer for EnergyMonitor {
    fn observe(&mut self, step: usize, state: &SolverState) -> Result<()> {
        let rate = dissipation_rate(&state.ut, &self.b)?;
        if step > 0 {
            self.dissipated += 0.5 * self.dt * (self.last_rate + rate);
        }
        self.last_rate = rate;
        if step.is_multiple_of(self.stride) {
            self.records.push(self.record(state)?);
        }
        Ok(())
    }
}

/// Runs `evolve` with an [`EnergyMonitor`] attached.
pub fn monitored_run(
    state: &SolverState,
    cfg: &StepperConfig,
    duration: f64,
    stride: usize,
) -> Result<(SolverState, Vec<EnergyRecord>)> {
    let mut monitor = EnergyMonitor::new(cfg, stride);
    let end = evolve(state, cfg, duration, &mut [&mut monitor])?;
    Ok((end, monitor.records))
}

/// Largest rise of `E` above its running minimum, relative to `E(0)`.
/// Zero for a nonincreasing series or vanishing initial energy.
pub fn energy_overshoot(records: &[EnergyRecord]) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    if first.energy == 0.0 {
        return 0.0;
    }
    let mut low = f64::INFINITY;
    let mut worst = 0.0f64;
    for r in records {
        low = low.min(r.energy);
        worst = worst.max(r.energy - low);
    }
    worst / first.energy
}

/// `max_t |E(0) - E(t) - dissipated(t)|` relative to `E(0)`.
pub fn dissipation_residual(records: &[EnergyRecord]) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    if first.energy == 0.0 {
        return 0.0;
    }
    records
        .iter()
        .map(|r| (first.energy - r.energy - r.dissipated).abs())
        .fold(0.0, f64::max)
        / first.energy
}

/// Monotonicity check of a single monitored run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyAudit {
    pub overshoot: f64,
    pub band: f64,
    pub residual: f64,
    pub pass: bool,
}

/// Checks that `E` is nonincreasing up to `ENERGY_BAND_COEFF * dt^2`.
pub fn energy_audit(records: &[EnergyRecord], dt: f64) -> Result<EnergyAudit> {
    if let Some(r) = records.iter().find(|r| !r.is_finite() || r.energy < 0.0) {
        log::warn!("energy record at t = {} is invalid", r.t);
        return Err(Error::NonFinite("energy record"));
    }
    let overshoot = energy_overshoot(records);
    let band = ENERGY_BAND_COEFF * dt * dt;
    Ok(EnergyAudit {
        overshoot,
        band,
        residual: dissipation_residual(records),
        pass: overshoot <= band,
    })
}

/// Energy audits of one problem at `dt, dt/2, dt/4, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyRefinement {
    pub dts: Vec<f64>,
    pub audits: Vec<EnergyAudit>,
    /// Fitted order of the dissipation residual in `dt`; `None` when every
    /// residual vanishes (zero data).
    pub residual_order: Option<f64>,
    pub pass: bool,
}

/// Runs `levels` halvings of `cfg.dt()` over `[0, duration]`. The
/// dissipation integral uses every step; records are kept at a stride that
/// samples the same physical times at every level.
pub fn energy_refinement(
    state: &SolverState,
    cfg: &StepperConfig,
    duration: f64,
    stride: usize,
    levels: usize,
) -> Result<EnergyRefinement> {
    let mut dts = Vec::with_capacity(levels);
    let mut audits = Vec::with_capacity(levels);
    for level in 0..levels {
        let factor = 1usize << level;
        let c = cfg.with_dt(cfg.dt() / factor as f64)?;
        let (_, records) = monitored_run(state, &c, duration, stride * factor)?;
        dts.push(c.dt());
        audits.push(energy_audit(&records, c.dt())?);
    }
    let residuals: Vec<f64> = audits.iter().map(|a| a.residual).collect();
    let residual_order = if residuals.iter().all(|&r| r == 0.0) {
        None
    } else {
        Some(convergence_order(&dts, &residuals)?.slope)
    };
    let monotone = audits.iter().all(|a| a.pass);
    let ordered = residual_order.is_none_or(|p| p >= RESIDUAL_ORDER_MIN);
    Ok(EnergyRefinement {
        dts,
        audits,
        residual_order,
        pass: monotone && ordered,
    })
}

impl EnergyRefinement {
    pub fn verdict(&self) -> Verdict {
        let mut v = Verdict::new(
            "energy",
            self.pass,
            "d/dt E = -2 ||b^{1/2} u_t||^2 <= 0 for E = ||u_t||^2 + ||(-Delta)^{s/2} u||^2 + ||a^{1/2} u||^2",
        );
        let worst = self
            .audits
            .iter()
            .map(|a| a.overshoot / a.band)
            .fold(0.0, f64::max);
        v.metric("max_overshoot_over_band", worst);
        v.metric("residual_order", self.residual_order.unwrap_or(f64::NAN));
        v.metric(
            "finest_residual",
            self.audits.last().map_or(0.0, |a| a.residual),
        );
        v.threshold("overshoot_band_coeff", ENERGY_BAND_COEFF);
        v.threshold("residual_order_min", RESIDUAL_ORDER_MIN);
        v
    }
}
