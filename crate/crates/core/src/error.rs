use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the open domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A scan or grid was asked to cover an empty range.
    #[error("empty range: {0}")]
    EmptyRange(String),
    #[error("unknown {what}: {value}")]
    Unknown { what: &'static str, value: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
