use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("feature dimension mismatch at feature {feature}: expected {expected} features, got {actual}")]
    Dimension {
        feature: usize,
        expected: usize,
        actual: usize,
    },

    #[error("learner has not been trained yet")]
    Untrained,

    #[error("feature {feature} has negative value {value}; multinomial naive Bayes needs non-negative inputs")]
    NegativeFeature { feature: usize, value: f64 },

    #[error("drift detector input {0} is outside [0, 1]")]
    DetectorInput(f64),

    #[error("no samples recorded")]
    Empty,

    #[error("stream has {available} samples but the warm start needs {required}")]
    StreamTooShort { available: usize, required: usize },

    #[error("sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: row {row}: column `{column}` is not numeric: {value:?}")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_sample(self, index: usize) -> Error {
        match self {
            e @ Error::AtSample { .. } => e,
            e => Error::AtSample {
                index,
                source: Box::new(e),
            },
        }
    }
}
