use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Arff { line: usize, message: String },

    #[error("invalid example set: {0}")]
    Schema(String),

    #[error("class label `{label}` is not one of {available:?}")]
    UnknownClass { label: String, available: Vec<String> },

    #[error("arity mismatch: expected {expected} features, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("cosine distance is undefined for a zero vector")]
    ZeroVector,

    #[error("cannot split: {0}")]
    Split(String),

    #[error("cannot train {algorithm}: {message}")]
    Training { algorithm: &'static str, message: String },

    #[error("solver did not converge after {iterations} iterations (KKT gap {gap:.3e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("invalid parameter grid: {0}")]
    Grid(String),

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("unsupported model file version `{found}` (expected `{expected}`)")]
    ModelVersion { found: String, expected: String },

    #[error("malformed model file {path}: {message}")]
    ModelFormat { path: PathBuf, message: String },

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arff(line: usize, message: impl Into<String>) -> Self {
        Error::Arff { line, message: message.into() }
    }

    pub(crate) fn training(algorithm: &'static str, message: impl Into<String>) -> Self {
        Error::Training { algorithm, message: message.into() }
    }
}
