use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping of failures, used by the CLI to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Input,
    Index,
    Reader,
    Config,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("ingest error: {0}")]
    Ingest(String),

    #[error("category graph is empty: no tuples were parsed")]
    EmptyGraph,

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("invalid keyword rules: {0}")]
    InvalidRules(String),

    #[error("cannot split dataset: {0}")]
    Split(String),

    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,

    #[error("duplicate passage id {0}")]
    DuplicatePassage(u64),

    #[error("passage {0} is not in the index")]
    UnknownPassage(u64),

    #[error("index file is malformed: {0}")]
    IndexFormat(String),

    #[error("index format version mismatch: expected version {expected}, found {found}")]
    IndexVersion { expected: u32, found: u32 },

    #[error("token budget {budget} too small for a question of {question_tokens} tokens")]
    Budget { budget: usize, question_tokens: usize },

    #[error("remote reader error (status {status:?}): {message}")]
    RemoteReader { status: Option<u16>, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("translation failed: {0}")]
    Translation(String),
}

impl Error {
    pub fn file(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::File { path: path.into(), source }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::File { .. } => ErrorClass::Io,
            Error::Json(_)
            | Error::Ingest(_)
            | Error::EmptyGraph
            | Error::UnknownCategory(_)
            | Error::InvalidRules(_)
            | Error::Split(_)
            | Error::Translation(_) => ErrorClass::Input,
            Error::EmptyCorpus
            | Error::DuplicatePassage(_)
            | Error::UnknownPassage(_)
            | Error::IndexFormat(_)
            | Error::IndexVersion { .. } => ErrorClass::Index,
            Error::Budget { .. } | Error::RemoteReader { .. } => ErrorClass::Reader,
            Error::Config(_) => ErrorClass::Config,
        }
    }
}
