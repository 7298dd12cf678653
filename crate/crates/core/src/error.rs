use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SlmError {
    /// Lengths, indices or factors that violate a shape requirement.
    #[error("input shape: {0}")]
    InputShape(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Every output of a lazy transform has already been produced.
    #[error("all {0} outputs have already been produced")]
    Exhausted(usize),

    #[error("construction check failed: {0}")]
    Construction(String),

    #[error("numerical integration did not converge: {reason} (estimate {estimate:.6e}, error {error:.3e}, {evaluations} evaluations)")]
    Numeric { reason: String, estimate: f64, error: f64, evaluations: usize },

    /// AG and baseline forms disagreed on a trial (verification mode).
    #[error("AG/baseline mismatch: {0}")]
    Mismatch(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, SlmError>;
