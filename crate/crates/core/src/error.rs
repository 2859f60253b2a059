use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("box {index} holds {count} points, at least 4 are required")]
    UnderfilledBox { index: usize, count: usize },

    #[error("weight-1/2 edges cannot be split into edge-disjoint triangles: {0}")]
    NotDecomposable(String),

    #[error("instance has {n} points, the limit is {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("linear program: {0}")]
    Lp(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed input: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(message: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(message.into()))
}
