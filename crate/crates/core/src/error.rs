use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("resolvent solver did not converge after {iterations} iterations (residual {residual:e})")]
    ResolventNotConverged { iterations: usize, residual: f64 },

    #[error("operator is multivalued at the given point")]
    Multivalued,

    #[error("implicit Euler step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "iteration did not converge within {iterations} iterations (last difference {last_difference:e})"
    )]
    NotConverged { iterations: usize, last_difference: f64 },

    #[error("solution blows up at t = {horizon}")]
    BlowUp { horizon: f64 },

    #[error("argument {value} lies beyond the admissible range {limit}")]
    HorizonExceeded { value: f64, limit: f64 },

    #[error("ambiguous problem: {0}")]
    Ambiguous(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
