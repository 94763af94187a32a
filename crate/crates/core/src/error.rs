use thiserror::Error;

/// Errors raised by grid, decomposition and tensor-train routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value {value} at multi-index {index:?}")]
    NonFinite { index: Vec<usize>, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank {rank} outside 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("index {index:?} out of bounds for shape {shape:?}")]
    IndexOutOfBounds {
        index: Vec<usize>,
        shape: Vec<usize>,
    },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("matrix is numerically singular (condition number {0:e})")]
    Singular(f64),

    #[error("degraded pivot: cross intersection has condition number {0:e}")]
    DegradedPivot(f64),

    #[error("integrated mass {0} is not positive")]
    NonPositiveMass(f64),

    #[error("axis {0} is not equidistant")]
    NotEquidistant(usize),

    #[error("tensor with {elements} elements exceeds the limit of {limit}")]
    TooLarge { elements: u128, limit: usize },

    #[error("bearing is undefined at the origin")]
    UndefinedBearing,

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
