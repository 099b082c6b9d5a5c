use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced while reading, training or evaluating.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A line of a text format could not be parsed.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A tag that is not declared in the active tagset.
    #[error("line {line}: unknown tag `{tag}`")]
    UnknownTag { tag: String, line: usize },

    /// The tagset configuration is inconsistent.
    #[error("invalid tagset: {0}")]
    Tagset(String),

    /// Predicted and gold corpora do not line up token by token.
    #[error("alignment mismatch at sentence {sentence}, token {token}: {detail}")]
    Alignment {
        sentence: usize,
        token: usize,
        detail: String,
    },

    /// Not enough data for the requested operation.
    #[error("corpus too small: {0}")]
    TooSmall(String),

    /// A configuration value is out of range.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
