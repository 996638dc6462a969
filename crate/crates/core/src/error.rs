use thiserror::Error;

/// Errors raised by parsers, the lexicon loader, and scoring operations.
///
/// Format errors carry the 1-based line or row that triggered them so that
/// CLI users can fix the offending input directly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("row {row}: {msg}")]
    Row { row: String, msg: String },

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("name pool exhausted: {needed} distinct names but only {available} pool entries")]
    PoolExhausted { needed: usize, available: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format { line, msg: msg.into() }
    }

    pub fn row(row: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Row { row: row.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
