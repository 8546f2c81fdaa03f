//! Fractional Laplacian powers and the norms used by the energy estimates.

use crate::error::{Error, Result};
use crate::grid::{forward, inverse, l2_norm, Field};
use crate::sum::{pairwise_map_sum, pairwise_sum};

/// Fractional order `s > 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s > 0.0 {
            Ok(FracOrder(s))
        } else {
            Err(Error::InvalidOrder(s))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Checks `d > 2s`, needed by the Sobolev embedding and the
    /// integrability-class energy estimate.
    pub fn check_subcritical(self, d: usize) -> Result<()> {
        if (d as f64) > 2.0 * self.0 {
            Ok(())
        } else {
            Err(Error::OrderTooLarge { d, s: self.0 })
        }
    }
}

/// Multiplies the spectrum of `f` bin-wise by `mult` and transforms back.
pub fn apply_multiplier(f: &Field, mult: &[f64]) -> Result<Field> {
    let mut spec = forward(f)?;
    spec.coeffs_mut()
        .iter_mut()
        .zip(mult)
        .for_each(|(z, &m)| *z *= m);
    inverse(&spec)
}

/// `(-Delta)^sigma f`, i.e. the multiplier `|xi|^{2 sigma}`. `sigma = 0` is
/// the identity.
pub fn frac_laplacian(f: &Field, sigma: f64) -> Result<Field> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidOrder(sigma));
    }
    if sigma == 0.0 {
        if !f.is_finite() {
            return Err(Error::NonFinite("frac_laplacian input"));
        }
        return Ok(f.clone());
    }
    let mult = f.grid().symbol(2.0 * sigma);
    apply_multiplier(f, &mult)
}

/// Discrete `L^p` norm `(h^d sum |f|^p)^{1/p}`; grid maximum for `p = inf`.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    if p == f64::INFINITY {
        return Ok(f.max_abs());
    }
    if p == 2.0 {
        return Ok(l2_norm(f));
    }
    let s = pairwise_map_sum(f.values(), |v| v.abs().powf(p));
    Ok((f.grid().cell_volume() * s).powf(1.0 / p))
}

/// `||(-Delta)^{s/2} f||_{L^2}` computed in physical space.
pub fn frac_seminorm(f: &Field, s: FracOrder) -> Result<f64> {
    Ok(l2_norm(&frac_laplacian(f, 0.5 * s.get())?))
}

/// Same seminorm through Plancherel: `((2L)^{-d} sum |xi|^{2s} |F|^2)^{1/2}`.
pub fn frac_seminorm_spectral(f: &Field, s: FracOrder) -> Result<f64> {
    let spec = forward(f)?;
    let mult = f.grid().symbol(2.0 * s.get());
    let terms: Vec<f64> = spec
        .coeffs()
        .iter()
        .zip(mult.iter())
        .map(|(z, &m)| m * z.norm_sqr())
        .collect();
    Ok((pairwise_sum(&terms) / f.grid().box_volume()).sqrt())
}

/// `H^s` norm in sum form, `||f||_{L^2} + ||(-Delta)^{s/2} f||_{L^2}`.
pub fn hs_norm(f: &Field, s: FracOrder) -> Result<f64> {
    Ok(l2_norm(f) + frac_seminorm(f, s)?)
}

/// `H^s` norm in integral form, `((2L)^{-d} sum (1 + |xi|^{2s}) |F|^2)^{1/2}`.
pub fn hs_norm_integral(f: &Field, s: FracOrder) -> Result<f64> {
    let spec = forward(f)?;
    let mult = f.grid().symbol(2.0 * s.get());
    let terms: Vec<f64> = spec
        .coeffs()
        .iter()
        .zip(mult.iter())
        .map(|(z, &m)| (1.0 + m) * z.norm_sqr())
        .collect();
    Ok((pairwise_sum(&terms) / f.grid().box_volume()).sqrt())
}

/// `||u||_{L^2} + ||(-Delta)^{s/2} u||_{L^2} + ||u_t||_{L^2}`.
pub fn norm1(u: &Field, ut: &Field, s: FracOrder) -> Result<f64> {
    u.ensure_same_grid(ut)?;
    Ok(l2_norm(u) + frac_seminorm(u, s)? + l2_norm(ut))
}

/// [`norm1`] plus `||(-Delta)^s u||_{L^2}`.
pub fn norm2(u: &Field, ut: &Field, s: FracOrder) -> Result<f64> {
    Ok(norm1(u, ut, s)? + l2_norm(&frac_laplacian(u, s.get())?))
}

/// Both sides of the fractional Sobolev inequality
/// `||f||_{L^q} <= C ||(-Delta)^{s/2} f||_{L^2}`, `q = 2d / (d - 2s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevCheck {
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, `None` when `rhs` vanishes.
    pub ratio: Option<f64>,
}

/// Sobolev exponent `2d / (d - 2s)`.
pub fn sobolev_exponent(d: usize, s: FracOrder) -> Result<f64> {
    s.check_subcritical(d)?;
    let d = d as f64;
    Ok(2.0 * d / (d - 2.0 * s.get()))
}

pub fn sobolev_check(f: &Field, s: FracOrder) -> Result<SobolevCheck> {
    let q = sobolev_exponent(f.grid().dim(), s)?;
    let lhs = lp_norm(f, q)?;
    let rhs = frac_seminorm(f, s)?;
    let ratio = (rhs > 0.0).then(|| lhs / rhs);
    Ok(SobolevCheck { q, lhs, rhs, ratio })
}

/// Both sides of Hölder's inequality `||fg||_{L^r} <= ||f||_{L^p} ||g||_{L^q}`
/// with `1/r = 1/p + 1/q`.
pub fn holder_sides(f: &Field, g: &Field, p: f64, q: f64) -> Result<(f64, f64)> {
    let inv_r = 1.0 / p + 1.0 / q;
    let r = 1.0 / inv_r;
    let lhs = lp_norm(&f.mul(g)?, r)?;
    let rhs = lp_norm(f, p)? * lp_norm(g, q)?;
    Ok((lhs, rhs))
}

/// Removes the mean.
pub fn project_mean_zero(f: &Field) -> Field {
    let m = f.mean();
    f.map(|v| v - m)
}
