use thiserror::Error;

/// Errors shared across the library. The CLI maps the variants onto its
/// exit codes (`Infeasible` -> 2, `Certificate` -> 3, `Usage` -> 64).
#[derive(Debug, Error)]
pub enum LabError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("infeasible: {condition}: {detail}")]
    Infeasible { condition: String, detail: String },
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type LabResult<T> = Result<T, LabError>;

impl LabError {
    pub fn pre(msg: impl Into<String>) -> Self {
        LabError::Precondition(msg.into())
    }

    pub fn infeasible(condition: impl Into<String>, detail: impl Into<String>) -> Self {
        LabError::Infeasible {
            condition: condition.into(),
            detail: detail.into(),
        }
    }
}
