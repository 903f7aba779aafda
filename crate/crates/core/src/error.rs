//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    /// Input violates the expected file schema; `at` is the offending key path.
    #[error("schema violation at {at}: {detail}")]
    Schema { at: String, detail: String },

    /// A paper id is listed under two authors of the same name block.
    #[error("paper {paper} of name {name} appears under authors {first} and {second}")]
    DuplicatePaper {
        name: String,
        paper: String,
        first: String,
        second: String,
    },

    #[error("invalid paper reference {0:?}: expected \"<id>-<index>\"")]
    BadPaperRef(String),

    #[error("name {0:?} has no alphabetic content")]
    EmptyName(String),

    #[error("author index {index} out of range for paper {paper} with {len} authors")]
    AuthorIndexOutOfRange {
        paper: String,
        index: usize,
        len: usize,
    },

    #[error("paper {0} not found in the store")]
    UnknownPaper(String),

    #[error("no author of paper {paper} matches name {name}")]
    NoMatchingAuthor { paper: String, name: String },

    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vocabulary is empty after min_count filtering")]
    EmptyVocabulary,

    #[error("walk corpus is empty: all nodes are isolated")]
    EmptyWalkCorpus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("evaluation inputs cover different paper sets: {0}")]
    UniverseMismatch(String),

    #[error("metric requires both classes, got only one")]
    SingleClass,

    #[error("metric requires at least one positive label")]
    NoPositives,

    #[error("training set is degenerate: {0}")]
    DegenerateTraining(String),

    #[error("author {author} has {papers} papers; need at least 2 to score")]
    TooFewPapers { author: String, papers: usize },
}

/// How a failure maps onto a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad flags or option values: exit 1.
    Usage,
    /// Malformed or inconsistent input data: exit 2.
    Data,
    /// Everything else: exit 3.
    Internal,
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn schema(at: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Schema {
            at: at.into(),
            detail: detail.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_) => ErrorClass::Usage,
            Error::DimensionMismatch { .. } => ErrorClass::Internal,
            _ => ErrorClass::Data,
        }
    }
}
