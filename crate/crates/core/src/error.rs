use thiserror::Error;

/// Errors raised by corpus handling and the analysis pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("duplicate sequence id `{0}`")]
    DuplicateId(String),

    #[error("invalid symbol `{0}`: symbols must be non-empty and contain no whitespace")]
    InvalidSymbol(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("window exceeds sequence length (window {window}, length {length})")]
    WindowTooLong { window: usize, length: usize },

    #[error("sequence `{id}` has {length} events; at least {required} needed")]
    SequenceTooShort { id: String, length: usize, required: usize },

    #[error("vocabulary empty: no sequence is at least {window} events long")]
    EmptyVocabulary { window: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal consistency error: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
