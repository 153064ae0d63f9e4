use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}D, got {got}D")]
    DimsMismatch { expected: usize, got: usize },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error("power iteration did not settle: last relative change {change:.3e}")]
    PowerIteration { change: f64 },

    #[error("dense analysis limited to {limit} matrix entries, problem has {entries}")]
    TooLarge { entries: usize, limit: usize },

    #[error(
        "image weight |psi| = {value:.3e} vanishes at x = {position:?} inside the nominal FOV; \
         increase the oversampling factor rho or reduce the centering shift"
    )]
    VanishingWeight { value: f64, position: [f64; 2] },

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
