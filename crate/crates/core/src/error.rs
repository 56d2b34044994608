use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("degenerate form (discriminant zero)")]
    Degenerate,

    #[error("map is not unimodular (determinant {0})")]
    NotUnimodular(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration incomplete: {0}")]
    Incomplete(String),

    #[error("cache file {path} is corrupt: {reason}")]
    CacheCorrupt { path: PathBuf, reason: String },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
