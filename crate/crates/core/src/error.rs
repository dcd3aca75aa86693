//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the numerical core, data pipeline, and trainer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: left {left:?}, right {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("{op}: {msg}")]
    InvalidArgument { op: &'static str, msg: String },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("mean_pool over a fully masked sequence")]
    EmptySequence,

    #[error("non-finite value detected in {op}")]
    NonFinite { op: &'static str },

    #[error("invalid generation config: {0}")]
    InvalidConfig(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("corpus line {line}: {msg}")]
    MalformedRecord { line: usize, msg: String },

    #[error("insufficient articles: task needs {required}, corpus has {available} eligible")]
    InsufficientArticles { required: usize, available: usize },

    #[error("unknown task name {name:?}; valid names: {valid}")]
    UnknownTask { name: String, valid: String },

    #[error("training aborted: non-finite loss at seed {seed}, epoch {epoch}, batch {batch}")]
    NanLoss { seed: u64, epoch: usize, batch: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(op: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidArgument { op, msg: msg.into() }
    }
}
