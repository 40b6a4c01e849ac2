use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a domain precondition (non-finite value, bad range).
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an API contract (shape mismatch, index out of range).
    #[error("contract error: {0}")]
    Contract(String),

    /// The computation itself produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed input data; the message names the offending path.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
