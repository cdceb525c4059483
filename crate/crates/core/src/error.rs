use thiserror::Error;

use crate::sentiment::Category;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{}{message}", line_prefix(*.line))]
    Validation { line: Option<u64>, message: String },

    #[error("line {line}: duplicate entry `{key}`")]
    Duplicate { line: u64, key: String },

    #[error("unknown {category} label `{label}`")]
    NotFound { label: String, category: Category },

    #[error("line {line}: unknown factor `{token}` in term descriptor")]
    UnknownFactor { line: u64, token: String },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("revised failure mode requires failure deflections")]
    MissingFailureDeflections,

    #[error("outcome mapping has no population counts")]
    MissingPopulations,

    #[error("protected value `{0}` has zero total population")]
    ZeroPopulation(String),

    #[error("need at least two protected values, found {0}")]
    TooFewProtectedValues(usize),

    #[error("deflection tables disagree on keys: {0}")]
    KeyMismatch(String),

    #[error("invalid alpha grid: {0}")]
    InvalidGrid(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn line_prefix(line: Option<u64>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl Error {
    pub(crate) fn validation(message: impl Into<String>) -> Self {
        Error::Validation {
            line: None,
            message: message.into(),
        }
    }

    pub(crate) fn validation_at(line: u64, message: impl Into<String>) -> Self {
        Error::Validation {
            line: Some(line),
            message: message.into(),
        }
    }
}
