//! Error type shared across the engine.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A statistic was requested over an empty value list.
    #[error("no observations")]
    NoObservations,

    /// A non-finite value reached a numeric routine.
    #[error("invalid observation at index {index}: {value} is not finite")]
    InvalidObservation { index: usize, value: f64 },

    /// Too few observations for the requested computation.
    #[error("insufficient observations: {0}")]
    InsufficientObservations(String),

    /// Point and weight maps do not cover the same factor set.
    #[error("weights/points key mismatch: {0}")]
    KeyMismatch(String),

    /// A dataset failed validation; the message carries row/column coordinates.
    #[error("{0}")]
    Data(String),

    /// A model configuration failed validation.
    #[error("config: {0}")]
    Config(String),

    /// A population cluster is too small to standardize a stratified factor.
    #[error(
        "cluster '{cluster}' has {count} region(s); at least 2 required to score factor '{factor}'"
    )]
    ClusterTooSmall {
        cluster: String,
        count: usize,
        factor: String,
    },

    /// Trend comparison over rating tables that share no region ids.
    #[error("no overlapping regions across rating tables")]
    NoOverlap,

    /// Invalid argument to an analysis routine.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
