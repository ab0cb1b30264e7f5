use thiserror::Error;

use crate::exact::IntVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size mismatch: {digits} digits but {labels} labels")]
    SizeMismatch { digits: usize, labels: usize },

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("element {index} is not congruent to the original modulo the lattice")]
    CongruenceViolation { index: usize },

    #[error("level {0} has no admissible zero direction")]
    NoAdmissibleDirection(usize),

    #[error("block {block} failed pair verification (labels {:?} and {:?})", .witness.0, .witness.1)]
    PairVerificationFailed {
        block: usize,
        witness: (IntVector, IntVector),
    },

    #[error("spectrum level {level}: two label sums coincide at {point:?}")]
    CollisionDetected { level: usize, point: IntVector },

    #[error("spectrum level {level}: rescaled element {point:?} leaves the inflated unit box")]
    ContainmentViolation { level: usize, point: IntVector },

    #[error("{needed} elements requested, cap is {cap}")]
    CapExceeded { needed: u128, cap: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("level {level} does not match any supported triangular template")]
    TemplateMismatch { level: usize },

    #[error("|ad - bc| = {det}, expected 1")]
    DeterminantViolation { det: String },

    #[error("admissibility scan inconclusive at start {start}, length {length}: {reason}")]
    Inconclusive {
        start: usize,
        length: usize,
        reason: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid system: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSystem(Vec<crate::system::Diagnostic>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
