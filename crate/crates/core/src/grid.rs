//! Periodic box `[-L, L]^d`, sampled fields and the discrete Fourier transform.
//!
//! Points sit at `x_j = -L + j h` with `h = 2L / N`, so the origin is the grid
//! point `j = N / 2`. The forward transform carries the quadrature weight
//! `h^d`:
//!
//! ```text
//! F(m) = h^d * sum_j f_j exp(-2 pi i m.j / N)
//! f_j  = (2L)^{-d} * sum_m F(m) exp(+2 pi i m.j / N)
//! ```
//!
//! so that `h^d sum |f|^2 = (2L)^{-d} sum |F|^2`, the discrete image of the
//! continuum Plancherel identity. Bin `m` carries the wavenumber
//! `xi = pi * j / L` with `j = m` for `m < N/2` and `j = m - N` otherwise.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::sum::{pairwise_map_sum, pairwise_zip_sum};

/// Isotropic periodic grid. Cheap to clone; all clones share plans and caches.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    d: usize,
    n: usize,
    l: f64,
    h: f64,
    /// Wavenumber of each bin along one axis, in FFT order.
    axis_xi: Vec<f64>,
    /// `|xi|^2` per flat bin.
    xi2: Arc<[f64]>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    symbols: Mutex<HashMap<u64, Arc<[f64]>>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.d == other.inner.d
                && self.inner.n == other.inner.n
                && self.inner.l.to_bits() == other.inner.l.to_bits())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("d", &self.inner.d)
            .field("n", &self.inner.n)
            .field("l", &self.inner.l)
            .finish()
    }
}

impl Grid {
    /// Builds the grid. `n` must be a power of two `>= 4`, `l > 0`, `1 <= d <= 3`.
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "N = {n} must be a power of two >= 4"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width L = {l} must be > 0"
            )));
        }
        let h = 2.0 * l / n as f64;
        let axis_xi: Vec<f64> = (0..n)
            .map(|m| {
                let j = if m < n / 2 {
                    m as f64
                } else {
                    m as f64 - n as f64
                };
                std::f64::consts::PI * j / l
            })
            .collect();
        let len = n.pow(d as u32);
        let mut xi2 = vec![0.0; len];
        let mut idx = [0usize; 3];
        for (flat, v) in xi2.iter_mut().enumerate() {
            unflatten(flat, n, d, &mut idx);
            *v = idx[..d].iter().map(|&m| axis_xi[m] * axis_xi[m]).sum();
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridInner {
                d,
                n,
                l,
                h,
                axis_xi,
                xi2: xi2.into(),
                fwd,
                inv,
                symbols: Mutex::new(HashMap::new()),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.d
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Half-width `L` of the box.
    pub fn half_width(&self) -> f64 {
        self.inner.l
    }

    /// Spacing `h = 2L / N`.
    pub fn spacing(&self) -> f64 {
        self.inner.h
    }

    /// Total number of samples `N^d`.
    pub fn len(&self) -> usize {
        self.inner.xi2.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.inner.h.powi(self.inner.d as i32)
    }

    /// Box measure `(2L)^d`.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.inner.l).powi(self.inner.d as i32)
    }

    /// Sample positions along one axis.
    pub fn axis_points(&self) -> Vec<f64> {
        (0..self.inner.n)
            .map(|j| -self.inner.l + j as f64 * self.inner.h)
            .collect()
    }

    /// Flat index of the grid point at the origin.
    pub fn origin_index(&self) -> usize {
        let n = self.inner.n;
        (0..self.inner.d).fold(0, |acc, _| acc * n + n / 2)
    }

    /// Writes the coordinates of sample `flat` into `out[..d]`.
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut idx = [0usize; 3];
        unflatten(flat, self.inner.n, self.inner.d, &mut idx);
        for k in 0..self.inner.d {
            out[k] = -self.inner.l + idx[k] as f64 * self.inner.h;
        }
    }

    /// Frequency lattice along one axis, ascending: `pi j / L` for `j = -N/2 .. N/2-1`.
    pub fn frequency_lattice(&self) -> Vec<f64> {
        let n = self.inner.n as i64;
        (-n / 2..n / 2)
            .map(|j| std::f64::consts::PI * j as f64 / self.inner.l)
            .collect()
    }

    /// Wavenumber of each bin along one axis, in transform order.
    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.inner.axis_xi
    }

    /// `|xi|^2` per flat bin.
    pub fn xi_squared(&self) -> &[f64] {
        &self.inner.xi2
    }

    /// Largest `|xi|` on the lattice.
    pub fn xi_max(&self) -> f64 {
        let axis = std::f64::consts::PI * (self.inner.n / 2) as f64 / self.inner.l;
        axis * (self.inner.d as f64).sqrt()
    }

    /// Cached multiplier `|xi|^power` per bin, with the `xi = 0` bin set to
    /// `0` for `power > 0` and `1` for `power == 0`.
    pub fn symbol(&self, power: f64) -> Arc<[f64]> {
        let key = power.to_bits();
        let mut cache = self.inner.symbols.lock().expect("symbol cache poisoned");
        cache
            .entry(key)
            .or_insert_with(|| {
                self.inner
                    .xi2
                    .iter()
                    .map(|&k2| {
                        if power == 0.0 {
                            1.0
                        } else if k2 == 0.0 {
                            0.0
                        } else {
                            k2.powf(0.5 * power)
                        }
                    })
                    .collect()
            })
            .clone()
    }

    /// Transforms complex samples in place, applying the `h^d` weight.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let w = self.cell_volume();
        data.iter_mut().for_each(|z| *z *= w);
    }

    /// Inverse transform in place, applying the `(2L)^{-d}` weight.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let w = 1.0 / self.box_volume();
        data.iter_mut().for_each(|z| *z *= w);
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.len());
        let n = self.inner.n;
        let d = self.inner.d;
        let plan = if forward {
            &self.inner.fwd
        } else {
            &self.inner.inv
        };
        // Last axis: lanes are contiguous.
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
            |scratch, lane| plan.process_with_scratch(lane, scratch),
        );
        // Remaining axes: gather strided lanes.
        for axis in (0..d.saturating_sub(1)).rev() {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = n * stride;
            data.par_chunks_mut(block).for_each_init(
                || {
                    (
                        vec![Complex64::new(0.0, 0.0); n],
                        vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
                    )
                },
                |(lane, scratch), chunk| {
                    for off in 0..stride {
                        for (i, z) in lane.iter_mut().enumerate() {
                            *z = chunk[off + i * stride];
                        }
                        plan.process_with_scratch(lane, scratch);
                        for (i, z) in lane.iter().enumerate() {
                            chunk[off + i * stride] = *z;
                        }
                    }
                },
            );
        }
    }
}

pub(crate) fn unflatten(mut flat: usize, n: usize, d: usize, idx: &mut [usize; 3]) {
    for k in (0..d).rev() {
        idx[k] = flat % n;
        flat /= n;
    }
}

/// Real samples on a grid, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x)` at every grid point; `x` has length `d`.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        let d = grid.dim();
        let mut x = [0.0; 3];
        let values = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                f(&x[..d])
            })
            .collect();
        Field::new(grid, values)
    }

    /// Discrete delta at the origin: `h^{-d}` at one point, zero elsewhere.
    pub fn delta(grid: &Grid) -> Self {
        let mut f = Field::zeros(grid);
        f.values[grid.origin_index()] = 1.0 / grid.cell_volume();
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.ensure_same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Field) -> Result<()> {
        self.ensure_same_grid(other)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, &b)| *a += c * b);
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Quadrature integral `h^d sum f`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * crate::sum::pairwise_sum(&self.values)
    }

    /// Mean value over the box.
    pub fn mean(&self) -> f64 {
        crate::sum::pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub(crate) fn to_complex(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect()
    }
}

/// Fourier coefficients of a field, same layout as [`Field`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("spectral coefficients"));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Flat index of the bin with mirrored wavenumber `-xi`.
    pub fn mirror_index(&self, flat: usize) -> usize {
        let n = self.grid.n();
        let d = self.grid.dim();
        let mut idx = [0usize; 3];
        unflatten(flat, n, d, &mut idx);
        idx[..d].iter().fold(0, |acc, &m| acc * n + (n - m) % n)
    }
}

/// Forward transform with the `h^d` quadrature weight.
pub fn forward(f: &Field) -> Result<SpectralField> {
    if !f.is_finite() {
        return Err(Error::NonFinite("forward transform input"));
    }
    let mut data = f.to_complex();
    f.grid.forward_in_place(&mut data);
    Ok(SpectralField {
        grid: f.grid.clone(),
        coeffs: data,
    })
}

/// Inverse transform; the imaginary part, which vanishes for spectra of
/// real fields up to rounding, is discarded.
pub fn inverse(spec: &SpectralField) -> Result<Field> {
    let mut data = spec.coeffs.clone();
    spec.grid.inverse_in_place(&mut data);
    let values: Vec<f64> = data.into_iter().map(|z| z.re).collect();
    Field::new(&spec.grid, values)
}

/// `h^d sum f g` with pairwise summation.
pub fn l2_inner(f: &Field, g: &Field) -> Result<f64> {
    f.ensure_same_grid(g)?;
    Ok(f.grid.cell_volume() * pairwise_zip_sum(&f.values, &g.values, |a, b| a * b))
}

/// `||f||_{L^2}` by quadrature.
pub fn l2_norm(f: &Field) -> f64 {
    (f.grid.cell_volume() * pairwise_map_sum(&f.values, |v| v * v)).sqrt()
}

/// Both sides of the discrete Plancherel identity:
/// `(h^d sum |f|^2, (2L)^d sum |F / (2L)^d|^2)`.
pub fn plancherel_sides(f: &Field) -> Result<(f64, f64)> {
    let spec = forward(f)?;
    let physical = f.grid.cell_volume() * pairwise_map_sum(&f.values, |v| v * v);
    let mags: Vec<f64> = spec.coeffs.iter().map(|z| z.norm_sqr()).collect();
    let spectral = crate::sum::pairwise_sum(&mags) / f.grid.box_volume();
    Ok((physical, spectral))
}

/// Fraction of `||u||^2 + ||u_t||^2` carried by the outer band
/// `max_k |x_k| >= 0.9 L`. Values near zero mean the periodic box is a
/// faithful stand-in for the whole space.
pub fn boundary_mass_fraction(u: &Field, ut: &Field) -> Result<f64> {
    u.ensure_same_grid(ut)?;
    let grid = &u.grid;
    let d = grid.dim();
    let edge = 0.9 * grid.half_width();
    let mut x = [0.0; 3];
    let mut band = Vec::new();
    let mut all = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let e = u.values[i] * u.values[i] + ut.values[i] * ut.values[i];
        all.push(e);
        grid.point(i, &mut x);
        if x[..d].iter().any(|c| c.abs() >= edge) {
            band.push(e);
        }
    }
    let total = crate::sum::pairwise_sum(&all);
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(crate::sum::pairwise_sum(&band) / total)
}
