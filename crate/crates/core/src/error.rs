use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("unknown relation label `{0}`")]
    UnknownLabel(String),

    #[error("pattern has {vars} variables, more than the limit of {limit}")]
    PatternTooLarge { vars: usize, limit: usize },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid path instance: {0}")]
    InvalidPath(String),

    #[error("enumeration exceeded the cap of {0} explanations")]
    TooManyExplanations(usize),

    #[error("time budget of {0:?} exceeded")]
    Timeout(std::time::Duration),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid document: {0}")]
    Document(String),

    #[error("invalid relevance labels: {0}")]
    Labels(String),
}
