use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probability must lie strictly in (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),

    #[error("SINR must be nonnegative and finite, got {0}")]
    InvalidSinr(f64),

    #[error("blocklength must be positive, got {0}")]
    InvalidBlocklength(f64),

    #[error("resource fraction must lie strictly in (0, 1), got {0}")]
    InvalidFraction(f64),

    #[error("invalid parameter `{name}`: {value} ({reason})")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("malformed region boundary: {0}")]
    MalformedBoundary(String),

    #[error("problem infeasible: {0}")]
    Infeasible(String),

    #[error("scenario config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV output error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON output error: {0}")]
    Json(#[from] serde_json::Error),
}
