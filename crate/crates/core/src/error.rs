use thiserror::Error;

use crate::curve::{Point, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid covering: {0}")]
    InvalidCovering(Violation),

    #[error("fiber over `{target}` sums to {sum}, exceeding the degree {degree}")]
    OverfullFiber {
        target: Point,
        sum: u64,
        degree: u32,
    },

    #[error("fiber over `{0}` is not fully listed; saturate the covering first")]
    UnsaturatedFiber(Point),

    #[error("point `{0}` is not listed in the covering profile")]
    UnlistedPoint(Point),

    #[error("point `{point}` is not a marked point of the curve")]
    UnknownPoint { point: Point },

    #[error("curves do not match: {0}")]
    CurveMismatch(String),

    #[error("weight {0} is outside [0, 1)")]
    WeightOutOfRange(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("expected a {expected} object, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("residue does not preserve the flag")]
    NotParabolic,

    #[error("covering is not a Galois profile (fiber multiplicities differ)")]
    NotGalois,

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: String, name: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit status used by the command-line tool.
    pub fn exit_status(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::Parse(_) => 2,
            Error::Validation(_) | Error::InvalidCovering(_) => 3,
            Error::UnknownName { .. } => 4,
            Error::KindMismatch { .. } => 5,
            Error::Internal(_) => 1,
            _ => 6,
        }
    }
}
