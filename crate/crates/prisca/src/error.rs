use thiserror::Error;

/// Errors produced by series construction, model fitting, preprocessing, the
/// simulation harness, and data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// A value, index, or argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A hyperparameter configuration fails validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The weighted regression design is rank-deficient.
    #[error("singular normal equations: {0}")]
    SingularDesign(String),

    /// A simulation specification cannot be realized.
    #[error("infeasible simulation spec: {0}")]
    Infeasible(String),

    /// A data file failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
