//! Log-log regression for moderateness exponents and convergence orders.

use crate::error::{Error, Result};

/// Least-squares line `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; `1` when the residual vanishes.
    pub r_squared: f64,
}

/// Ordinary least squares on paired samples.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need matching samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite sample".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Fitted exponent `N` of `||f_eps|| ~ eps^{-N}` and its goodness of fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeratenessFit {
    pub exponent: f64,
    pub r_squared: f64,
}

/// Regresses `log ||f_eps||` on `log(1/eps)`.
///
/// Needs at least four samples, strictly decreasing `eps` in `(0, 1]` and
/// positive norms. Constant norms give exponent `0`.
pub fn fit_moderateness(eps: &[f64], norms: &[f64]) -> Result<ModeratenessFit> {
    if eps.len() < 4 || eps.len() != norms.len() {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 (eps, norm) pairs, got {}",
            eps.len().min(norms.len())
        )));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::DegenerateFit(
            "eps must be strictly decreasing in (0, 1]".into(),
        ));
    }
    if norms.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit("norms must be positive".into()));
    }
    if norms.windows(2).all(|w| w[0] == w[1]) {
        return Ok(ModeratenessFit {
            exponent: 0.0,
            r_squared: 1.0,
        });
    }
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let fit = line_fit(&xs, &ys)?;
    Ok(ModeratenessFit {
        exponent: fit.slope,
        r_squared: fit.r_squared,
    })
}

/// Fitted order `p` of `err ~ C h^p`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> Result<LineFit> {
    if err.iter().any(|&e| !(e > 0.0)) || h.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateFit(
            "errors and steps must be positive".into(),
        ));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    line_fit(&xs, &ys)
}

/// Slopes `log(v_i / v_{i+1}) / log(h_i / h_{i+1})` between consecutive samples.
pub fn local_slopes(h: &[f64], v: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(v.windows(2))
        .map(|(hw, vw)| (vw[0] / vw[1]).ln() / (hw[0] / hw[1]).ln())
        .collect()
}
