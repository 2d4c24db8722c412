use chrono::NaiveDateTime;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("timestamp {0} is not aligned to a whole hour")]
    Alignment(NaiveDateTime),

    #[error("warm-up: need {needed} valid trailing hours, have {available}")]
    WarmUp { needed: usize, available: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid interval: {0}")]
    Interval(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("timestamps for counter {counter} are not strictly increasing at line {line}")]
    Ordering { counter: String, line: u64 },

    #[error("missing forecast weather: need {needed} hours after the origin, have {available}")]
    MissingWeather { needed: usize, available: usize },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("model format: {0}")]
    Format(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
