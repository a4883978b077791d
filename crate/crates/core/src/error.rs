use std::path::PathBuf;

use thiserror::Error;

/// Kinds of alist parse failure; each carries the 1-based line it was found on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlistError {
    #[error("line {line}: malformed header: {detail}")]
    MalformedHeader { line: usize, detail: String },
    #[error("line {line}: index {index} out of range [1, {max}]")]
    IndexOutOfRange { line: usize, index: usize, max: usize },
    #[error("line {line}: degree mismatch: declared {declared}, found {found}")]
    DegreeMismatch { line: usize, declared: usize, found: usize },
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("row/column adjacency lists disagree at check {check}, variable {var}")]
    Inconsistent { check: usize, var: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Alist(#[from] AlistError),
    #[error("invalid parity-check matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("code dimension k = {k} exceeds the brute-force limit of {limit}")]
    TooLarge { k: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bisection did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("every theta_l * P_l is zero; the tilted pmf is undefined")]
    DegenerateTilt,
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
