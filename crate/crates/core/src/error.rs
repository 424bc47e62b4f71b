use thiserror::Error;

/// Errors shared across the whole pipeline.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("wrong parity: {0}")]
    WrongParity(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("degenerate Heegner point: {0}")]
    DegenerateHeegner(String),
    #[error("saturation failure: {0}")]
    SaturationFailure(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("rank gate: {0}")]
    RankGate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
