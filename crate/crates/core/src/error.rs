use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad pcap magic {magic:#010x} at byte offset {offset}")]
    BadMagic { magic: u32, offset: usize },

    #[error("truncated capture at byte offset {offset}: {what}")]
    TruncatedFile { offset: usize, what: &'static str },

    #[error("unsupported link type {0}")]
    UnsupportedLinktype(u32),

    #[error("row {line}: {reason}")]
    Row { line: usize, reason: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("invalid label {0}")]
    InvalidLabel(usize),

    #[error("class {0} has no training samples")]
    EmptyClass(String),

    #[error("empty test set")]
    EmptyTestSet,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed {format} data: {reason}")]
    Format { format: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn row(line: usize, reason: impl Into<String>) -> Self {
        Error::Row { line, reason: reason.into() }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format { format, reason: reason.into() }
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch { expected: expected.to_string(), got: got.to_string() }
    }
}
