use thiserror::Error;

/// Errors raised by the numerical and counting routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the accepted interval.
    #[error("argument out of bounds: {0}")]
    Bounds(String),
    /// The prime table does not reach far enough for the request.
    #[error("prime table limit {limit} is below the required {needed}")]
    InsufficientTable { limit: u64, needed: u64 },
    /// The argument is outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// The equation would be integrated through its singular point at u = 0.
    #[error("singular point: {0}")]
    Singularity(String),
    #[error("invalid input: {0}")]
    Input(String),
    /// Evaluation requested outside the covered range.
    #[error("out of range: {0}")]
    Range(String),
    /// A configured cost ceiling would be exceeded.
    #[error("cost guard exceeded: {0}")]
    Cost(String),
    /// Two solutions do not belong to the same equation.
    #[error("mismatched equation parameters: {0}")]
    Spec(String),
    /// A quadrature or iteration failed to reach its tolerance.
    #[error("tolerance not met: {0}")]
    Tolerance(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
