//! Crate-wide error type with CLI exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad arguments, configs, grids or lattice specs.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Violated mathematical hypothesis, reported with the failing margin.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Numerical failure: rank-check rejection, non-finite data, no convergence.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed on-disk data (magic, header, body length).
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the CLI: 2 config, 3 numerical, 4 IO/format.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Hypothesis(_) | Error::Numerical(_) => 3,
            Error::Format(_) | Error::Io(_) => 4,
        }
    }
}
