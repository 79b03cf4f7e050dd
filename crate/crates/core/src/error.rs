use thiserror::Error;

use crate::ring::CoefficientRing;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus {0}: {1}")]
    InvalidModulus(u32, &'static str),
    #[error("mixed coefficient rings: {0} and {1}")]
    MixedRing(CoefficientRing, CoefficientRing),
    #[error("ring {0} does not contain 1/2")]
    NoHalf(CoefficientRing),
    #[error("truncation mismatch: need order {needed}, got {got}")]
    Truncation { needed: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("cell budget exceeded: {needed} cells requested, budget {budget}")]
    ResourceLimit { needed: u64, budget: u64 },
    #[error("need at least {needed} terms, got {got}")]
    InsufficientTerms { needed: usize, got: usize },
    #[error("term {index} is not positive")]
    NonPositiveTerm { index: usize },
    #[error("zero recurrence")]
    ZeroRecurrence,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("parse error at line {line}: {msg}")]
    ParseLine { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
