use thiserror::Error;

/// Failures raised while evaluating an expression at a single point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by a value of magnitude {0:e}")]
    Singularity(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point has {got} coordinates, chart needs {want}")]
    PointDimension { want: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree error: {0}")]
    Degree(String),
    #[error("variance mismatch: {0}")]
    Variance(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular metric at point")]
    SingularMetric,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("degenerate 2-form (|det| = {0:e})")]
    DegenerateForm(f64),
    #[error("projection is not idempotent at sample point (deviation {0:e})")]
    NonIdempotentProjection(f64),
    #[error("gamma matrices violate the Clifford relation: {0}")]
    GammaConvention(String),
    #[error("sample set is empty after exclusions")]
    EmptySampleSet,
    #[error("integration step produced a non-finite state at step {0}")]
    Step(usize),
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("invalid Lie structure: {0}")]
    Lie(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Point-local failures: the sample is skipped and counted as excluded.
    pub fn is_point_local(&self) -> bool {
        matches!(
            self,
            Error::SingularMetric | Error::Eval(_) | Error::DegenerateForm(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
