//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed or unsupported file contents (bad magic, wrong encoding, truncation).
    #[error("format error: {0}")]
    Format(String),

    /// Text input that failed to parse, with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The window shifts leave part of the signal uncovered, so the
    /// frame-operator diagonal vanishes and no dual exists.
    #[error("window shifts do not cover the signal (zero diagonal at sample {0})")]
    Coverage(usize),

    /// Dual-based synthesis was requested for a plan that is not painless.
    #[error("plan is not painless: min channel count {min_channels} < window support {support}")]
    NonPainless {
        min_channels: usize,
        support: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
