use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid query `{query}`: {reason}")]
    InvalidQuery { query: String, reason: String },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("{what} too large: {size} exceeds cap {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("backend error: {0}")]
    Backend(String),

    #[error("workload generation failed: {0}")]
    Generation(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid_query(query: &str, reason: impl Into<String>) -> Self {
        Error::InvalidQuery {
            query: query.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failing run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::InvalidQuery { .. }
                | Error::InvalidPlan(_)
                | Error::TooLarge { .. }
                | Error::Validation { .. }
                | Error::Json(_)
        )
    }
}
