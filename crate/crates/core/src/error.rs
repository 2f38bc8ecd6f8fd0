use thiserror::Error;

use crate::algebra::AlgebraDescriptor;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("algebra mismatch: {left} vs {right}")]
    AlgebraMismatch { left: AlgebraDescriptor, right: AlgebraDescriptor },

    #[error("grade {grade} outside range {min}..={max}")]
    GradeOutOfRange { grade: i32, min: i32, max: i32 },

    #[error("matrix is not an element of {0}")]
    NotInAlgebra(AlgebraDescriptor),

    #[error("invalid algebra parameters: {0}")]
    InvalidDescriptor(String),

    #[error("singular matrix")]
    Singular,

    #[error("element is not nilpotent; exact exponential unavailable")]
    NotNilpotent,

    #[error("element is not of pure grade {expected}")]
    NotPureGrade { expected: i32 },

    #[error("{which} requires a {expected} descriptor, got {got}")]
    IncompatibleDescriptor { which: &'static str, expected: &'static str, got: AlgebraDescriptor },

    #[error("TANGENT_IN_CONTACT_PLANE: |omega(x, v)| = {value:e}")]
    TangentInContactPlane { value: f64 },

    #[error("TANGENT_NOT_IN_CONTACT_PLANE: |omega(x, v)| = {value:e}")]
    TangentNotInContactPlane { value: f64 },

    #[error("vector is not tangent to the sphere at the base point (|<x, v>| = {value:e})")]
    NotTangent { value: f64 },

    #[error("zero tangent vector")]
    ZeroTangent,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("cochain degree {degree} not supported by {op}")]
    DegreeOutOfRange { degree: usize, op: &'static str },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point outside chart domain")]
    OutsideChart,

    #[error("degenerate flag grid: {0}")]
    DegenerateGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
