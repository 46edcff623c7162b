use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported partition: level {level} holds {classes} weight classes")]
    UnsupportedPartition { level: usize, classes: usize },

    #[error("level {0} cannot reach higher levels")]
    Absorbing(usize),

    #[error("kernel and coefficient table describe different partitions")]
    MismatchedPartition,

    #[error("{what} refused: {value} exceeds the guard of {limit}")]
    Guard { what: &'static str, value: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
