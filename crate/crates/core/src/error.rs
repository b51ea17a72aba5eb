use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index out of range: {0}")]
    Index(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("iteration diverged at iteration {iter} with step size lambda = {lambda}: {reason}")]
    Divergence {
        lambda: f64,
        iter: usize,
        reason: String,
    },
    #[error("relative error undefined: ground truth has zero norm")]
    UndefinedMetric,
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::Singular(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
