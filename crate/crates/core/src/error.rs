use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate document id \"{0}\"")]
    DuplicateId(String),
    #[error("corpus degenerate: {0}")]
    DegenerateCorpus(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("K exceeds vocabulary (K = {k}, V = {vocab})")]
    KExceedsVocabulary { k: usize, vocab: usize },
    #[error("inference undefined for LSI")]
    InferenceUndefined,
    #[error("no in-vocabulary tokens")]
    NoScorableTokens,
    #[error("topic index {topic} out of range (K = {k})")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("term absent from corpus: \"{0}\"")]
    TermAbsent(String),
    #[error("model and corpus vocabularies differ")]
    VocabularyMismatch,
    #[error("undefined for empty union")]
    EmptyUnion,
    #[error("nothing to lay out")]
    EmptyGraph,
    #[error("unknown export format \"{0}\"")]
    UnknownFormat(String),
    #[error("selection failed: {0}")]
    Selection(String),
    #[error("stage {stage} failed: {message}")]
    StageFailed { stage: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
