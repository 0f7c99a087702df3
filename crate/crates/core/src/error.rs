use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ratio triple ({d}, {w}, {r}) is outside (0, 1]^3")]
    InvalidPoint { d: f64, w: f64, r: f64 },

    #[error("accuracy {0} is not a fraction in [0, 1]")]
    InvalidAccuracy(f64),

    #[error("budget T = {0} must lie strictly between 0 and 1")]
    InvalidBudget(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("training split size {n_train} must lie in [1, {len})")]
    SplitOutOfRange { n_train: usize, len: usize },

    #[error("insufficient grid structure: {0}")]
    InsufficientGrid(String),

    #[error("map document: {0}")]
    MapFormat(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("trainer protocol violation: {0}")]
    Protocol(String),

    #[error("transcript does not match this run: {0}")]
    TranscriptMismatch(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
