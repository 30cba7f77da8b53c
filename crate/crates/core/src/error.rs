use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point {index} has no neighbors within the search radius")]
    IsolatedPoint { index: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("no convergence after {iterations} iterations (residual history {log:?})")]
    ConvergenceFailure { iterations: usize, log: Vec<f64> },
    #[error("model assumption violated: {0}")]
    ModelError(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("resonant indicial roots: {0}")]
    Resonance(String),
    #[error("series evaluated at offset {offset:e}, beyond guard radius {guard:e}")]
    DivergenceRisk { offset: f64, guard: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("not an eigenvalue: {0}")]
    NotAnEigenvalue(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
