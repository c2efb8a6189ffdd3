use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("string function accepts strings up to length {max_len}, but {needed} is required")]
    DomainTooSmall { needed: usize, max_len: usize },

    #[error("zero denominator in {context}")]
    ZeroDenominator { context: String },

    #[error("infinite curvature: {context}")]
    InfiniteCurvature { context: String },

    #[error("enumerating {count} strings exceeds the budget of {budget}")]
    EnumerationBudgetExceeded { count: u128, budget: u64 },

    #[error("action string of length {len} exceeds horizon {horizon}")]
    StringTooLong { len: usize, horizon: usize },

    #[error("tail from stage {stage} must have length {expected}, got {got}")]
    WrongTailLength { stage: usize, expected: usize, got: usize },

    #[error("policy undefined at stage {stage}, state {state}")]
    PolicyUndefined { stage: usize, state: usize },

    #[error("curvature must be positive, got {0}")]
    NonpositiveCurvature(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error at {field}: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn zero_denominator(context: impl Into<String>) -> Self {
        Error::ZeroDenominator { context: context.into() }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
