use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by estimators, stopping rules and the replication harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough observations for the estimator to be defined.
    #[error("insufficient data: {what} needs {needed}, have {have}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        have: usize,
    },

    /// The data has no spread (or a zero density) where one is required.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The experiment cannot be scored, e.g. no registered true value.
    #[error("unsupported experiment: {0}")]
    Unsupported(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Unsupported(_) | Error::InsufficientData { .. } | Error::Degenerate(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
