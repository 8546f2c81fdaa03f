//! Friedrichs mollifiers, mollifying nets and coefficient families.
//!
//! The bump is `alpha * exp(-1 / (1 - |x|^2))` on the unit ball. A net
//! `psi_eps(x) = eps^{-d} psi(x / eps)` is sampled directly on the target
//! grid and renormalized to unit discrete mass there, because a bump only
//! four cells wide carries a quadrature error of order `1e-3` in its mass.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{forward, inverse, Field, Grid};

pub use crate::fit::{fit_moderateness, ModeratenessFit};

/// Smallest admissible `eps`, in grid cells.
pub const RESOLUTION_CELLS: f64 = 4.0;

fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Minimal-image displacement `x - c` on the torus.
fn wrapped_r2(x: &[f64], c: &[f64], l: f64) -> f64 {
    let period = 2.0 * l;
    x.iter()
        .zip(c)
        .map(|(&xi, &ci)| {
            let dx = xi - ci;
            let dx = dx - period * (dx / period).round();
            dx * dx
        })
        .sum()
}

/// Normalized bump on a reference grid.
#[derive(Clone, Debug)]
pub struct Mollifier {
    alpha: f64,
    profile: Field,
}

/// Builds the bump on `grid`, which must resolve the unit ball with at
/// least eight points per axis and contain it.
pub fn make_mollifier(grid: &Grid) -> Result<Mollifier> {
    if 2.0 / grid.spacing() < 8.0 {
        return Err(Error::UnderResolved(format!(
            "spacing {} gives fewer than 8 points across the unit ball",
            grid.spacing()
        )));
    }
    if grid.half_width() <= 1.0 {
        return Err(Error::UnderResolved(format!(
            "box half-width {} does not contain the unit ball",
            grid.half_width()
        )));
    }
    let raw = Field::from_fn(grid, |x| bump(x.iter().map(|v| v * v).sum()))?;
    let alpha = 1.0 / raw.integral();
    Ok(Mollifier {
        alpha,
        profile: raw.scaled(alpha),
    })
}

impl Mollifier {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.profile.grid().dim()
    }

    /// The bump sampled on its reference grid.
    pub fn profile(&self) -> &Field {
        &self.profile
    }

    /// `psi(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.alpha * bump(x.iter().map(|v| v * v).sum())
    }

    /// `max psi = alpha / e`, attained at the origin.
    pub fn sup(&self) -> f64 {
        self.alpha * (-1.0f64).exp()
    }
}

fn check_eps(eps: f64, grid: &Grid) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) || eps >= grid.half_width() {
        return Err(Error::InvalidEpsilon(eps));
    }
    let limit = RESOLUTION_CELLS * grid.spacing();
    if eps < limit {
        return Err(Error::EpsilonUnderResolved { eps, limit });
    }
    Ok(())
}

/// `psi_eps` centred at the origin.
pub fn mollifying_net(psi: &Mollifier, eps: f64, grid: &Grid) -> Result<Field> {
    let origin = vec![0.0; grid.dim()];
    mollifying_net_at(psi, eps, grid, &origin)
}

/// `psi_eps(x - center)` with periodic wrap, renormalized to unit mass.
pub fn mollifying_net_at(psi: &Mollifier, eps: f64, grid: &Grid, center: &[f64]) -> Result<Field> {
    if psi.dim() != grid.dim() || center.len() != grid.dim() {
        return Err(Error::GridMismatch);
    }
    check_eps(eps, grid)?;
    let l = grid.half_width();
    let inv_eps2 = 1.0 / (eps * eps);
    let raw = Field::from_fn(grid, |x| bump(wrapped_r2(x, center, l) * inv_eps2))?;
    let mass = raw.integral();
    Ok(raw.scaled(1.0 / mass))
}

/// `f * psi_eps` as a circular convolution. The kernel is centred at the
/// origin, which sits at index `N/2`, hence the `(-1)^m` shift per axis.
///
/// For `f >= 0` the result is clamped at zero; the clamp only ever removes
/// rounding-level negatives.
pub fn regularize(f: &Field, psi_eps: &Field) -> Result<Field> {
    f.ensure_same_grid(psi_eps)?;
    let grid = f.grid();
    let mut fs = forward(f)?;
    let ks = forward(psi_eps)?;
    let n = grid.n();
    let d = grid.dim();
    let mut idx = [0usize; 3];
    for (i, (z, k)) in fs.coeffs_mut().iter_mut().zip(ks.coeffs()).enumerate() {
        crate::grid::unflatten(i, n, d, &mut idx);
        let parity = idx[..d].iter().sum::<usize>() % 2;
        let sign = if parity == 0 { 1.0 } else { -1.0 };
        *z *= k * sign;
    }
    let mut out = inverse(&fs)?;
    if f.min() >= 0.0 && psi_eps.min() >= 0.0 {
        let mut clamped = 0usize;
        let mut worst = 0.0f64;
        for v in out.values_mut() {
            if *v < 0.0 {
                worst = worst.min(*v);
                clamped += 1;
                *v = 0.0;
            }
        }
        if clamped > 0 {
            log::debug!("regularize: clamped {clamped} negative samples, worst {worst:e}");
        }
    }
    Ok(out)
}

/// Provenance of a coefficient net.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientKind {
    Zero,
    Delta,
    DeltaSquared,
    Smooth,
    Custom,
}

/// User-supplied `eps -> field` map.
pub type CustomCoefficient = Arc<dyn Fn(f64, &Grid) -> Result<Field> + Send + Sync>;

/// One coefficient of the equation as a function of `eps`.
#[derive(Clone)]
pub enum CoefficientSpec {
    Zero,
    /// `strength * psi_eps(x - center)`.
    Delta {
        strength: f64,
        center: Vec<f64>,
    },
    /// `strength * psi_eps(x - center)^2`.
    DeltaSquared {
        strength: f64,
        center: Vec<f64>,
    },
    /// `base * psi_eps`.
    Smooth(Field),
    Custom(CustomCoefficient),
}

impl fmt::Debug for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientSpec::Zero => write!(f, "Zero"),
            CoefficientSpec::Delta { strength, center } => f
                .debug_struct("Delta")
                .field("strength", strength)
                .field("center", center)
                .finish(),
            CoefficientSpec::DeltaSquared { strength, center } => f
                .debug_struct("DeltaSquared")
                .field("strength", strength)
                .field("center", center)
                .finish(),
            CoefficientSpec::Smooth(_) => write!(f, "Smooth(..)"),
            CoefficientSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl CoefficientSpec {
    pub fn delta(d: usize) -> Self {
        CoefficientSpec::Delta {
            strength: 1.0,
            center: vec![0.0; d],
        }
    }

    pub fn delta_squared(d: usize) -> Self {
        CoefficientSpec::DeltaSquared {
            strength: 1.0,
            center: vec![0.0; d],
        }
    }

    pub fn kind(&self) -> CoefficientKind {
        match self {
            CoefficientSpec::Zero => CoefficientKind::Zero,
            CoefficientSpec::Delta { .. } => CoefficientKind::Delta,
            CoefficientSpec::DeltaSquared { .. } => CoefficientKind::DeltaSquared,
            CoefficientSpec::Smooth(_) => CoefficientKind::Smooth,
            CoefficientSpec::Custom(_) => CoefficientKind::Custom,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CoefficientSpec::Delta { strength, .. }
            | CoefficientSpec::DeltaSquared { strength, .. } => {
                if !(strength.is_finite() && *strength >= 0.0) {
                    return Err(Error::NegativeBase);
                }
            }
            CoefficientSpec::Smooth(base) => {
                if base.min() < 0.0 {
                    return Err(Error::NegativeBase);
                }
            }
            CoefficientSpec::Zero | CoefficientSpec::Custom(_) => {}
        }
        Ok(())
    }

    fn evaluate(&self, psi: &Mollifier, eps: f64, grid: &Grid) -> Result<Field> {
        let field = match self {
            CoefficientSpec::Zero => Field::zeros(grid),
            CoefficientSpec::Delta { strength, center } => {
                mollifying_net_at(psi, eps, grid, center)?.scaled(*strength)
            }
            CoefficientSpec::DeltaSquared { strength, center } => {
                mollifying_net_at(psi, eps, grid, center)?.map(|v| strength * v * v)
            }
            CoefficientSpec::Smooth(base) => {
                if base.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                regularize(base, &mollifying_net(psi, eps, grid)?)?
            }
            CoefficientSpec::Custom(f) => f(eps, grid)?,
        };
        if field.min() < 0.0 {
            return Err(Error::NegativeCoefficient);
        }
        Ok(field)
    }
}

/// Size law of an additive perturbation `c(eps)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PerturbationLaw {
    /// `exp(-1/eps)`, smaller than every power of `eps`.
    Exponential,
    /// `eps^p`; a polynomial control that is not negligible.
    Power(f64),
}

impl PerturbationLaw {
    pub fn magnitude(self, eps: f64) -> f64 {
        match self {
            PerturbationLaw::Exponential => (-1.0 / eps).exp(),
            PerturbationLaw::Power(p) => eps.powf(p),
        }
    }
}

/// Which members of the problem receive the additive perturbation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    pub law: PerturbationLaw,
    pub on_a: bool,
    pub on_b: bool,
    pub on_u0: bool,
    pub on_u1: bool,
}

impl Perturbation {
    pub fn on_mass(law: PerturbationLaw) -> Self {
        Perturbation {
            law,
            on_a: true,
            on_b: false,
            on_u0: false,
            on_u1: false,
        }
    }
}

/// Family `eps -> (a_eps, b_eps)` of nonnegative coefficient fields.
#[derive(Clone, Debug)]
pub struct CoefficientNet {
    a: CoefficientSpec,
    b: CoefficientSpec,
    mollifier: Mollifier,
    perturbation: Option<Perturbation>,
}

/// Builds a net, rejecting negative bases or strengths.
pub fn coefficient_net(
    a: CoefficientSpec,
    b: CoefficientSpec,
    mollifier: Mollifier,
) -> Result<CoefficientNet> {
    a.validate()?;
    b.validate()?;
    Ok(CoefficientNet {
        a,
        b,
        mollifier,
        perturbation: None,
    })
}

impl CoefficientNet {
    pub fn a_spec(&self) -> &CoefficientSpec {
        &self.a
    }

    pub fn b_spec(&self) -> &CoefficientSpec {
        &self.b
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    pub fn perturbation(&self) -> Option<Perturbation> {
        self.perturbation
    }

    /// The net with `c(eps)` added to the coefficients selected by `pert`.
    pub fn negligible_perturbation(&self, pert: Perturbation) -> CoefficientNet {
        CoefficientNet {
            perturbation: Some(pert),
            ..self.clone()
        }
    }

    /// `(a_eps, b_eps)` on `grid`.
    pub fn evaluate(&self, eps: f64, grid: &Grid) -> Result<(Field, Field)> {
        let mut a = self.a.evaluate(&self.mollifier, eps, grid)?;
        let mut b = self.b.evaluate(&self.mollifier, eps, grid)?;
        if let Some(p) = self.perturbation {
            let c = p.law.magnitude(eps);
            if p.on_a {
                a = a.map(|v| v + c);
            }
            if p.on_b {
                b = b.map(|v| v + c);
            }
        }
        Ok((a, b))
    }
}
