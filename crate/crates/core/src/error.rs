use thiserror::Error;

use crate::hull::MinNormResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time grid rejected: {0}")]
    InvalidGrid(String),

    #[error("required time {0} is not present in the path")]
    MissingTime(f64),

    #[error("min-norm iteration did not converge after {iterations} iterations (gap {gap:e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        best: Box<MinNormResult>,
    },

    #[error("instance too large for exhaustive classification: dimension {dimension}, {count} points")]
    InstanceTooLarge { dimension: usize, count: usize },

    #[error("radial norm underflow at euclidean clock exp({log_clock})")]
    Underflow { log_clock: f64 },

    #[error("all {trials} trials were censored at s_max = {s_max}")]
    AllCensored { trials: usize, s_max: f64 },

    #[error("ambiguous hull verdicts in {ambiguous} of {trials} trials exceed the 0.1% budget")]
    AmbiguousRate { ambiguous: u64, trials: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
