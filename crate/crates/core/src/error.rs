use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("target is not in the column space (least-squares residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "no convergence after {iterations} iterations (distance bracket [{lower:e}, {upper:e}])"
    )]
    Convergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error(
        "retry budget of {attempts} exhausted; best distance {best_distance:e} exceeds threshold {threshold:e}"
    )]
    RetriesExhausted {
        attempts: usize,
        best_distance: f64,
        threshold: f64,
    },

    #[error("predicate failed at sample {index}: {source}")]
    Predicate {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
