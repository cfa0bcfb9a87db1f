use std::path::PathBuf;

use thiserror::Error;

use crate::tensor::TensorError;

/// Errors raised by the data, pricing, training and evaluation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: header does not match the option-chain schema (found `{found}`)")]
    BadHeader { path: PathBuf, found: String },

    #[error("{path}: {bad} of {total} rows malformed (more than 10%); first: {first}")]
    TooManyMalformed { path: PathBuf, bad: usize, total: usize, first: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("pricing failed: {0}")]
    Pricing(String),

    #[error("cannot split chronologically: {0}")]
    Split(String),

    #[error("training aborted: {0}")]
    Training(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("forecaster `{model}` failed on sample {sample}: {source}")]
    Forecast {
        model: String,
        sample: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
