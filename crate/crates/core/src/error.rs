use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("{kind} index {index} out of range [1, {max}]")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        max: usize,
    },

    #[error("invalid range {lo}..={hi} for length {len}")]
    InvalidRange { lo: usize, hi: usize, len: usize },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed bigraph encoding: {0}")]
    Encoding(String),

    #[error("nothing to emit")]
    EmptyResults,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
