use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// An internal invariant was broken (duplicate arrival, missing edge,
    /// out-of-range probability). Always a bug upstream of the caller.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("metric undefined on an empty graph")]
    EmptyGraph,

    #[error("reference matrix has zero spectral norm")]
    ZeroNorm,

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

impl Error {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
