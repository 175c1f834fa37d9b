use std::path::PathBuf;

use crate::lifecycle::{RiskState, RiskTransition};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("duplicate risk id `{0}`")]
    DuplicateId(String),

    #[error("assessment has no raw probability, cost or schedule value to normalize")]
    NothingToNormalize,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{path}:{line}: {message}")]
    VectorFile {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no precomputed embedding for text `{0}`")]
    MissingEmbedding(String),

    #[error("Likert band {0} is outside 1..=5")]
    BandOutOfRange(i64),

    #[error("qualitative assessment is unset")]
    UnsetQualitative,

    #[error("no matches survive the {0} score threshold")]
    NoMatches(f64),

    #[error("statistical test: {0}")]
    Statistics(String),

    #[error("illegal transition `{transition}` from state `{state}`")]
    IllegalTransition {
        state: RiskState,
        transition: RiskTransition,
    },

    #[error("lifecycle of risk `{risk_id}`: {message}")]
    Lifecycle { risk_id: String, message: String },

    #[error("pooled covariance matrix is singular")]
    Singular,

    #[error("cannot classify style: {0} is unset")]
    Unclassifiable(&'static str),

    #[error("project `{0}` not found in corpus")]
    UnknownProject(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
