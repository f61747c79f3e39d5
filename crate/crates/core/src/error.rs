use thiserror::Error;

/// Errors raised by the exact ECA analysis stack.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is well-formed but exceeds a documented resource bound.
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    /// An input file or table could not be parsed or failed validation.
    #[error("format error: {0}")]
    Format(String),
    /// An internal invariant was violated (e.g. a clearly negative mutual information).
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
