use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {0} exceeds 2^53 and cannot be converted to a real exactly")]
    IndexTooLarge(u64),

    #[error("level K={0} is not supported for numeric evaluation (maximum {max})", max = crate::iterlog::K_MAX_NUMERIC)]
    UnsupportedLevel(u32),

    #[error("invalid level K={0}: levels start at 1")]
    InvalidLevel(u32),

    #[error("invalid window [{lo}, {hi}]")]
    InvalidWindow { lo: u64, hi: u64 },

    #[error("invalid drift at position {position}: {reason}")]
    InvalidDrift { position: u64, reason: String },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("invalid table: {0}")]
    Table(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
