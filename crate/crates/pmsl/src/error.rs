//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("event log is empty")]
    EmptyLog,

    #[error("unknown label: {0:?}")]
    UnknownLabel(String),

    #[error("label {0:?} is reserved and cannot name a model activity")]
    ReservedLabel(String),

    #[error("fold count {k} invalid for {variants} variants (need 2 <= k <= variants)")]
    InvalidFoldCount { k: usize, variants: usize },

    #[error("test variants must not cover every variant of the log")]
    TestCoversAllVariants,

    #[error("variant designated for the test set does not occur in the log: {0}")]
    UnknownTestVariant(String),

    #[error("simulated log size {simulated} does not match reference size {reference} (enable rescaling to compare anyway)")]
    SizeMismatch { simulated: usize, reference: usize },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training aborted: loss became non-finite in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("variant enumeration exceeded the ceiling of {0} distinct variants")]
    VariantCeiling(usize),

    #[error("state-space exploration exceeded the guard of {0} moves")]
    StateSpaceGuard(usize),

    #[error("no generated tree passed the filter: {0}")]
    NoCandidate(String),

    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),

    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),

    #[error("process tree syntax error at byte {at}: {msg}")]
    TreeSyntax { at: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("TOML error: {0}")]
    Toml(String),
}

impl Error {
    /// Wraps an [`std::io::Error`] together with the path that produced it.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
