use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Inconsistent data for a sentence pair (0-based pair index).
    #[error("sentence pair {pair}: {msg}")]
    Data { pair: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("finite-difference oracle failed at coordinate {index}: {msg}")]
    Oracle { index: usize, msg: String },

    #[error("non-finite gradient in tensor `{0}`")]
    NonFiniteGradient(String),

    #[error("non-finite loss at update {update} (loss = {loss})")]
    NonFiniteLoss { update: usize, loss: f64 },

    #[error("unsupported checkpoint format: {0}")]
    Format(String),

    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),

    #[error("scoring: {0}")]
    Scoring(String),

    #[error("lookup: {0}")]
    Lookup(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File { path: path.into(), source }
    }
}
