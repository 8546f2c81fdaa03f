use std::path::PathBuf;

/// Errors raised by the solver, the experiment layer and the file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid Lebesgue exponent p = {0}")]
    InvalidP(f64),
    #[error("order too large: need d > 2s, got d = {d}, s = {s}")]
    OrderTooLarge { d: usize, s: f64 },
    #[error("invalid fractional order s = {0}")]
    InvalidOrder(f64),
    #[error("mollifier under-resolved: {0}")]
    UnderResolved(String),
    #[error("eps = {eps} is below the resolution limit 4h = {limit}")]
    EpsilonUnderResolved { eps: f64, limit: f64 },
    #[error("invalid eps = {0}: must lie in (0, 1] and fit inside the box")]
    InvalidEpsilon(f64),
    #[error("base field of a smooth coefficient has a negative entry")]
    NegativeBase,
    #[error("coefficient field has a negative entry")]
    NegativeCoefficient,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("solution became unstable at t = {t}: norm {norm:e} exceeds {limit:e}")]
    Unstable { t: f64, norm: f64, limit: f64 },
    #[error("quadrature needs at least 3 nodes, got {0}")]
    QuadratureUnderResolved(usize),
    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("bad snapshot file: {0}")]
    Format(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
