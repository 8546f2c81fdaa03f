//! Convergence of the regularized solutions to the classical one when the
//! coefficients are already smooth.
//!
//! The reference uses the unregularized coefficients on the same grid and
//! with the same step, so the measured error isolates the effect of `eps`.
//! Initial data are not regularized: with constant coefficients the two
//! problems then coincide and the error vanishes to rounding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::convergence_order;
use crate::grid::{boundary_mass_fraction, l2_norm, Field};
use crate::mollify::{mollifying_net, regularize, Mollifier};
use crate::propagate::{evolve, Scheme, SolverState, StepperConfig};

use super::{RunSetup, Verdict};

/// Smallest acceptable fitted order of the coherence error in `eps`.
pub const COHERENCE_ORDER_MIN: f64 = 0.9;

/// Errors at or below this level count as exact agreement.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceStudy {
    pub eps: Vec<f64>,
    /// `||u_eps(T) - u(T)||_{L^2}`.
    pub errors: Vec<f64>,
    pub monotone: bool,
    /// Fitted order, `None` when every error is at rounding level.
    pub order: Option<f64>,
    /// Largest boundary-mass fraction of the reference run.
    pub boundary_mass: f64,
    pub pass: bool,
}

/// Solves with `a * psi_eps, b * psi_eps` for every `eps` and compares with
/// the solution for `a, b` at `T`.
pub fn coherence_study(
    a: &Field,
    b: &Field,
    u0: &Field,
    u1: &Field,
    psi: &Mollifier,
    eps_list: &[f64],
    setup: &RunSetup,
) -> Result<CoherenceStudy> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("eps_list must be strictly decreasing".into()));
    }
    let start = SolverState::new(u0.clone(), u1.clone(), 0.0)?;
    let config =
        |a: Field, b: Field| StepperConfig::new(setup.s, setup.dt, Scheme::StrangSplit, a, b);
    let solve = |a: Field, b: Field| -> Result<Field> {
        Ok(evolve(&start, &config(a, b)?, setup.t_final, &mut [])?.u)
    };
    let stride = setup.stride.max(1);
    let mut boundary_mass = 0.0f64;
    let mut probe = |k: usize, st: &SolverState| -> Result<()> {
        if k.is_multiple_of(stride) {
            boundary_mass = boundary_mass.max(boundary_mass_fraction(&st.u, &st.ut)?);
        }
        Ok(())
    };
    let end = evolve(
        &start,
        &config(a.clone(), b.clone())?,
        setup.t_final,
        &mut [&mut probe],
    )?;
    boundary_mass = boundary_mass.max(boundary_mass_fraction(&end.u, &end.ut)?);
    let reference = end.u;
    let errors: Vec<f64> = eps_list
        .par_iter()
        .map(|&eps| {
            let k = mollifying_net(psi, eps, &setup.grid)?;
            let u = solve(regularize(a, &k)?, regularize(b, &k)?)?;
            Ok(l2_norm(&u.sub(&reference)?))
        })
        .collect::<Result<_>>()?;

    let exact = errors.iter().all(|&e| e <= EXACT_TOLERANCE);
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let order = if exact || errors.len() < 2 || errors.iter().any(|&e| e <= 0.0) {
        None
    } else {
        Some(convergence_order(eps_list, &errors)?.slope)
    };
    let pass = exact || (monotone && order.is_some_and(|p| p >= COHERENCE_ORDER_MIN));
    Ok(CoherenceStudy {
        eps: eps_list.to_vec(),
        errors,
        monotone,
        order,
        boundary_mass,
        pass,
    })
}

impl CoherenceStudy {
    pub fn verdict(&self) -> Verdict {
        let mut v = Verdict::new(
            "coherence",
            self.pass,
            "u_eps -> u in L^2 as eps -> 0 when a, b are smooth and ||a_eps - a||_inf, ||b_eps - b||_inf -> 0",
        );
        v.metric("order", self.order.unwrap_or(f64::NAN))
            .metric("monotone", if self.monotone { 1.0 } else { 0.0 })
            .metric("max_error", self.errors.iter().copied().fold(0.0, f64::max))
            .metric("boundary_mass", self.boundary_mass)
            .threshold("order_min", COHERENCE_ORDER_MIN)
            .threshold("exact_tolerance", EXACT_TOLERANCE)
            .threshold("boundary_mass_max", super::sweeps::BOUNDARY_MASS_MAX);
        v
    }
}
