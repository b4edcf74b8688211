use thiserror::Error;

use crate::trace::Unit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: Unit, found: Unit },
    #[error("trace too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("no signal: {0}")]
    NoSignal(String),
    #[error("invalid window: {0}")]
    Window(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
