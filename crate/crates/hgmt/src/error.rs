//! Error type shared by every module of the crate.
//!
//! `Domain` marks inputs outside an operation's mathematical domain (non-finite
//! coordinates, empty windows, exponents out of range).  `Parse` and `Io` come
//! from the serialization layer.  Verdicts such as "divergent" are ordinary
//! report fields, not errors.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for a `Domain` error with a formatted message.
pub fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
