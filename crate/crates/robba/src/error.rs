use thiserror::Error;

/// Failures shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("window error: {what} (achievable window ends at {achievable})")]
    Window { what: String, achievable: i64 },
    #[error("not divisible at level {level}")]
    Divisibility { level: u32 },
    #[error("exceptional character: {0}")]
    Exceptional(String),
    #[error("type mismatch: {0}")]
    Mismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
