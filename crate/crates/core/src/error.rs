use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request does not fit the supported integer range.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A brute-force computation would exceed its work budget.
    #[error("budget exceeded: {what} needs {required} units of work, budget is {budget}")]
    Budget {
        what: String,
        required: u128,
        budget: u128,
    },

    /// The truncation point is too small for the tail bound to be valid.
    #[error("truncation prime {given} is below the required minimum {required}")]
    Truncation { given: u64, required: u64 },

    #[error("malformed state: {0}")]
    State(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(CoreError::Domain(msg.into()))
}
