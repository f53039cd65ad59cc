use thiserror::Error;

use crate::coeff::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("extension atoms persist: {0}")]
    ExtensionAtomsPersist(String),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: String, found: String },
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("constant obstruction: jet-free term {0} has no total-derivative primitive")]
    ConstantObstruction(String),
    #[error("zero-weight division on monomial {0}")]
    ZeroWeight(String),
    #[error("homotopy series exceeded its iteration cap of {0}")]
    IterationCap(usize),
    #[error("not a bivector: super degree {0}")]
    NotABivector(usize),
    #[error("skewness violation: symmetric part {0}")]
    SkewnessViolation(String),
    #[error("not in canonical coordinate: {0}")]
    NotCanonicalCoordinate(String),
    #[error("division by a non-monomial expression: {0}")]
    NonMonomialDivision(String),
    #[error("order overflow: requested {requested}, available {available}")]
    OrderOverflow { requested: usize, available: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
