use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("class {class} has only {available} training instances, {requested} requested")]
    ClassTooSmall {
        class: usize,
        available: usize,
        requested: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("feature dimension mismatch: model expects {expected} {party} features, got {actual}")]
    DimensionMismatch {
        party: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("empty instance set")]
    EmptyInstanceSet,

    #[error("population of {available} cannot supply {requested} survivors")]
    PopulationTooSmall { available: usize, requested: usize },

    #[error("hypervolume is only implemented for 1 to 3 objectives, got {0}")]
    UnsupportedDimension(usize),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
