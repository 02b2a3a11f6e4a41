use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty prefix has no distribution")]
    EmptyPrefix,

    #[error("infinite divergence: desired distribution excludes an observed group `{0}`")]
    InfiniteDivergence(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid topic `{topic}`: {reason}")]
    InvalidTopic { topic: String, reason: String },

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("relevance-proportional distribution undefined: every group has zero mean relevance")]
    ZeroRelevance,

    #[error("topic `{0}` has an empty default ranking")]
    EmptyDefaultRanking(String),

    #[error("exact search over a pool of {pool} documents exceeds the bound of {bound}")]
    ExactSearchTooLarge { pool: usize, bound: usize },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed dataset bundle: {0}")]
    Bundle(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn topic(topic: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidTopic {
            topic: topic.into(),
            reason: reason.into(),
        }
    }
}
