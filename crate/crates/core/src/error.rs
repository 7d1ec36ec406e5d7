use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: supported range is 1..=4")]
    UnsupportedDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("potential is not integrable: alpha = {alpha} must be < n = {n} when epsilon = 0")]
    NonIntegrable { alpha: f64, n: usize },

    #[error("sample grid node coincides with the singularity of the potential")]
    SingularNode,

    #[error("fourier cutoff {cutoff} aliases on a grid of size {grid} (need cutoff <= grid/2 - 1)")]
    Aliasing { cutoff: usize, grid: usize },

    #[error("potential fourier data has cutoff {have}, assembly needs {need}")]
    InsufficientCutoff { have: usize, need: usize },

    #[error("basis dimension {dim} exceeds configured maximum {max}")]
    Resource { dim: usize, max: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("spectra come from different truncations: {0}")]
    MismatchedTruncation(String),

    #[error("quadrature did not converge: achieved error estimate {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("insufficient data for exponent fit: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
