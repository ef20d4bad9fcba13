use thiserror::Error;

use crate::laurent::LaurentError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// The Laurent phenomenon failed somewhere; this is always a bug.
    #[error("non-exact division: {context}")]
    NonExactDivision { context: String },
    #[error("vertex {vertex} is not mutable (step {step})")]
    NotMutable { vertex: String, step: usize },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("truncation too shallow: {0}")]
    DepthViolation(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("polynomial error: {0}")]
    Laurent(#[from] LaurentError),
}

impl EngineError {
    /// True for internal failures (as opposed to bad requests).
    pub fn is_engine_fault(&self) -> bool {
        matches!(self, EngineError::NonExactDivision { .. } | EngineError::Invariant(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EngineError::NonExactDivision { .. } => "non_exact_division",
            EngineError::NotMutable { .. } => "not_mutable",
            EngineError::UnknownVertex(_) => "unknown_vertex",
            EngineError::InvalidInput(_) => "invalid_input",
            EngineError::Invariant(_) => "invariant",
            EngineError::DepthViolation(_) => "depth_violation",
            EngineError::Unsupported(_) => "unsupported",
            EngineError::Laurent(_) => "laurent",
        }
    }
}

pub type Result<T> = std::result::Result<T, EngineError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(EngineError::InvalidInput(msg.into()))
}

pub(crate) fn invariant<T>(msg: impl Into<String>) -> Result<T> {
    Err(EngineError::Invariant(msg.into()))
}
