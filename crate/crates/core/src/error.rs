use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dense matrix of size {size} exceeds the guard of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("coefficient system is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("completion assumption violated: {0}")]
    Assumption(String),

    #[error("the reference signal has zero norm")]
    ZeroReference,

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, last: Vec<Complex64> },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
