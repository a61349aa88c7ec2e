use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record{}: {reason}", fmt_doc(.doc_id))]
    MalformedRecord {
        doc_id: Option<String>,
        reason: String,
    },

    #[error("document {0} has no sentences")]
    EmptyDocument(String),

    #[error("rouge-n requires n >= 1, got {0}")]
    InvalidN(usize),

    #[error("brute-force oracle limited to {limit} sentences, document {doc_id} has {len}")]
    TooLarge {
        doc_id: String,
        len: usize,
        limit: usize,
    },

    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    VocabOverflow { id: usize, vocab_size: usize },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("section label {label} out of range for {sections} sections")]
    LabelOutOfRange { label: usize, sections: usize },

    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),

    #[error("training document {0} has no oracle labels")]
    MissingLabels(String),

    #[error("validation set is empty")]
    EmptyValidationSet,

    #[error("no checkpoints to select from")]
    NoCheckpoints,

    #[error("documents differ: {0} vs {1}")]
    DocMismatch(String, String),

    #[error("need at least {bins} comparisons for {bins} bins, got {docs}")]
    TooFewDocs { docs: usize, bins: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {source}")]
    Line {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_doc(doc_id: &Option<String>) -> String {
    match doc_id {
        Some(id) => format!(" (document {id})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by bad arguments rather than bad data.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::InvalidConfig(_) | Error::AlphaOutOfRange(_) | Error::InvalidN(_) => true,
            Error::Line { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
