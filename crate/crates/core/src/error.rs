//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by the numerical routines and simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// An iterative method failed to converge or produced a non-finite value.
    #[error("numeric failure in {func}: {detail}")]
    Numeric { func: &'static str, detail: String },

    /// Caller supplied inconsistent or degenerate input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// Reading or writing an artifact failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn numeric(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            func,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
