//! Seeded random problems with smooth nonnegative coefficients.
//!
//! Every run draws its parameters from its own ChaCha stream, so run `k` is
//! the same whatever the suite size or the grid it is later sampled on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Field, Grid};

/// Default seed of the randomized suites.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Default number of runs in a suite.
pub const DEFAULT_RUNS: usize = 100;

/// Size and seed of a randomized suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteSpec {
    pub runs: usize,
    pub seed: u64,
    pub dim: usize,
    /// Number of Fourier modes per axis in each coefficient.
    pub modes: usize,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        SuiteSpec {
            runs: DEFAULT_RUNS,
            seed: DEFAULT_SEED,
            dim: 1,
            modes: 3,
        }
    }
}

/// `c0 + sum_j sum_k amp cos(k pi x_j / L + phase)` with `c0` large enough to
/// keep the field nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigCoefficient {
    pub offset: f64,
    /// `(axis, k, amplitude, phase)`.
    pub terms: Vec<(usize, u32, f64, f64)>,
}

impl TrigCoefficient {
    fn draw(rng: &mut ChaCha8Rng, dim: usize, modes: usize, base_max: f64, amp_max: f64) -> Self {
        let mut terms = Vec::new();
        let mut total = 0.0;
        for axis in 0..dim {
            for k in 1..=modes as u32 {
                let amp = rng.random_range(-amp_max..=amp_max);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                total += amp.abs();
                terms.push((axis, k, amp, phase));
            }
        }
        TrigCoefficient {
            offset: total + rng.random_range(0.0..=base_max),
            terms,
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        let scale = std::f64::consts::PI / grid.half_width();
        Field::from_fn(grid, |x| {
            self.offset
                + self
                    .terms
                    .iter()
                    .map(|&(j, k, amp, ph)| amp * (k as f64 * scale * x[j] + ph).cos())
                    .sum::<f64>()
        })
        .map(|f| f.map(|v| v.max(0.0)))
    }
}

/// `amp * exp(-|x - center|^2 / (2 width^2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBump {
    pub amp: f64,
    pub center: Vec<f64>,
    pub width: f64,
}

impl GaussianBump {
    fn draw(rng: &mut ChaCha8Rng, dim: usize, amp: (f64, f64)) -> Self {
        GaussianBump {
            amp: rng.random_range(amp.0..=amp.1),
            center: (0..dim).map(|_| rng.random_range(-0.5..=0.5)).collect(),
            width: rng.random_range(0.3..=0.6),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        let inv = 1.0 / (2.0 * self.width * self.width);
        Field::from_fn(grid, |x| {
            let r2: f64 = x
                .iter()
                .zip(&self.center)
                .map(|(a, c)| (a - c) * (a - c))
                .sum();
            self.amp * (-r2 * inv).exp()
        })
    }
}

/// Parameters of one random problem, independent of the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomRun {
    pub id: usize,
    pub a: TrigCoefficient,
    pub b: TrigCoefficient,
    pub u0: GaussianBump,
    pub u1: GaussianBump,
}

/// Sampled fields of a [`RandomRun`].
#[derive(Clone, Debug)]
pub struct RunFields {
    pub a: Field,
    pub b: Field,
    pub u0: Field,
    pub u1: Field,
}

impl RunFields {
    pub fn zeros(grid: &Grid) -> Self {
        let z = Field::zeros(grid);
        RunFields {
            a: z.clone(),
            b: z.clone(),
            u0: z.clone(),
            u1: z,
        }
    }
}

impl RandomRun {
    pub fn draw(seed: u64, id: usize, dim: usize, modes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id as u64);
        RandomRun {
            id,
            a: TrigCoefficient::draw(&mut rng, dim, modes, 2.0, 0.5),
            b: TrigCoefficient::draw(&mut rng, dim, modes, 0.5, 0.2),
            u0: GaussianBump::draw(&mut rng, dim, (0.5, 2.0)),
            u1: GaussianBump::draw(&mut rng, dim, (-1.0, 1.0)),
        }
    }

    pub fn fields(&self, grid: &Grid) -> Result<RunFields> {
        Ok(RunFields {
            a: self.a.sample(grid)?,
            b: self.b.sample(grid)?,
            u0: self.u0.sample(grid)?,
            u1: self.u1.sample(grid)?,
        })
    }
}

pub fn random_suite(spec: &SuiteSpec) -> Vec<RandomRun> {
    (0..spec.runs)
        .map(|id| RandomRun::draw(spec.seed, id, spec.dim, spec.modes))
        .collect()
}
