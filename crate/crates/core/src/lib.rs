//! Spectral solver and experiment harness for the fractional telegraph
//! equation
//!
//! ```text
//! u_tt + (-Delta)^s u + a(x) u + b(x) u_t = 0
//! ```
//!
//! with singular (delta-like) mass and dissipation. Singular coefficients are
//! replaced by nets of mollified fields `a_eps`, `b_eps`; the experiment layer
//! measures how the resulting solution nets behave as `eps -> 0`.
//!
//! Module map:
//!
//! * [`grid`]: periodic box, fields, transforms and quadrature.
//! * [`fracops`]: fractional Laplacian, `L^p` and `H^s` norms, inequality checks.
//! * [`mollify`]: mollifiers, mollifying nets, coefficient families.
//! * [`propagate`]: exact sub-flows, Strang splitting, the modal oracle.
//! * [`duhamel`]: superposition solver for sourced problems and its cross-check.
//! * [`experiments`]: energy audits, bound audits, eps-sweeps, coherence.
//! * [`io`]: snapshot, CSV and verdict formats.
//! * [`cli`]: JSON run configuration and the subcommand drivers.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod duhamel;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod fracops;
pub mod grid;
pub mod io;
pub mod mollify;
pub mod propagate;
pub mod sum;

pub use error::{Error, Result};
pub use fracops::FracOrder;
pub use grid::{Field, Grid, SpectralField};
pub use propagate::{Scheme, SolverState, StepperConfig};
