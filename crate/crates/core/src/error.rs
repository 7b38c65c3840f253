use thiserror::Error;

/// Errors raised by the algebra and numerics routines.
#[derive(Error, Debug)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed text input; `position` is a byte offset into `input`.
    #[error("parse error at offset {position} in {input:?}: {message}")]
    Parse {
        input: String,
        position: usize,
        message: String,
    },
    /// A loaded or constructed object violates one of its invariants.
    #[error("invariant violated: {0}")]
    Invariant(String),
    /// Basis construction could not complete with tree generators.
    #[error("basis anomaly at degree {degree}: {message}")]
    BasisAnomaly { degree: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(input: &str, position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            position,
            message: message.into(),
        }
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
