use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is missing, out of range or inconsistent.
    #[error("invalid configuration: `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// The configuration text could not be parsed.
    #[error("malformed configuration: {0}")]
    Parse(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violates a structural precondition (monotone CDF, labeled
    /// snapshot, no-global-feedback kernel, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical instability at step {step}: {reason}")]
    Numerical { step: usize, reason: String },

    #[error("event budget exhausted: cap of {cap} events reached at t = {time}")]
    EventBudget { cap: u64, time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
