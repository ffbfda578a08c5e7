use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The exponents fall outside every regime where the integral formula
    /// carries meaning.
    #[error("regime refusal: {0}")]
    Refused(String),

    #[error("field mismatch: {0}")]
    Field(String),

    #[error("dense tensor of {entries} entries exceeds the {limit} entry guard")]
    TooLarge { entries: u128, limit: u128 },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors that stem from the mathematics rather than from bad
    /// input (the CLI maps these to a distinct exit code).
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Refused(_))
    }
}
