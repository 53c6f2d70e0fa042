use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed input record or file; `context` names the record or line.
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("document {id}: {message}")]
    Ingestion { id: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frame {frame:?} has no annotated tokens")]
    EmptyFrame { frame: String },

    #[error("lexicon for frame {frame:?} is empty after {stage}")]
    EmptyLexicon { frame: String, stage: String },

    #[error("no word of the {frame:?} lexicon is in the embedding vocabulary")]
    NoLexiconWordInVocab { frame: String },

    #[error("dictionary covers no lexicon words (frame {frame:?})")]
    NoTranslations { frame: String },

    #[error("series are not aligned: {0}")]
    Alignment(String),

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("zero value at index {index} cannot be used as a divisor")]
    ZeroDivisor { index: usize },

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("collinear lags: design matrix is singular")]
    CollinearLags,

    #[error("event {event:?} never occurs")]
    EmptyEvent { event: String },

    #[error("pool {pool:?} has no qualifying documents")]
    EmptyPool { pool: String },

    #[error("cannot find an intruder for frame {frame:?} among frames {others:?}")]
    NoIntruder { frame: String, others: Vec<String> },

    #[error("document sets differ: {0}")]
    MismatchedDocuments(String),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
