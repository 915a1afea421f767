use thiserror::Error;

use crate::linalg::CMatrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix has eigenvalue {min_eigenvalue:e} below the positivity tolerance")]
    NotPositive { min_eigenvalue: f64 },

    #[error("effect has eigenvalue {max_eigenvalue} above 1")]
    EffectTooLarge { max_eigenvalue: f64 },

    #[error("effects do not sum to the identity (max deviation {deviation:e})")]
    NotAPovm { deviation: f64 },

    #[error("Bloch vector has norm {norm}, outside the unit ball")]
    OutsideBlochBall { norm: f64 },

    #[error("hedging parameter must be positive, got {0}")]
    InvalidBeta(f64),

    #[error("no observations: total count is zero")]
    NoData,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("matrix is singular (min eigenvalue {min_eigenvalue:e})")]
    Singular { min_eigenvalue: f64 },

    #[error("observed outcome {index} has zero probability under the state")]
    ZeroProbabilityEvent { index: usize },

    #[error("linear inversion is under-determined: rank {rank} of {needed}")]
    Underdetermined {
        rank: usize,
        needed: usize,
        /// Traceless Hermitian directions the measurement cannot see.
        null_directions: Vec<CMatrix>,
    },

    #[error("likelihood ratio is indeterminate: both log-likelihoods are -inf")]
    IndeterminateRatio,

    #[error("eigendecomposition did not converge")]
    EigenFailed,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
    }
}
