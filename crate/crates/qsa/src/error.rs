use thiserror::Error;

/// Errors surfaced by state, channel, and optimizer construction or application.
#[derive(Debug, Error)]
pub enum QsaError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),
    #[error("bad rank: {0}")]
    BadRank(String),
    #[error("p out of range: p = {p}, allowed [0, {max}]")]
    POutOfRange { p: f64, max: f64 },
    #[error("not an isometry: {0}")]
    NotAnIsometry(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("basis not balanced: {0}")]
    BasisNotBalanced(String),
    #[error("not a valid channel: {0}")]
    NotAChannel(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, QsaError>;
