//! Algebraic and geometric machinery of contact projective structures and
//! their subordinate projective structures, at the level of the flat models.
//!
//! The core is generic over the scalar type ([`Scalar`]); algebraic identities
//! are checked with exact [`Rational`] arithmetic, flows and curves are sampled
//! in `f64`. The aliases below name the common instantiations.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod connections;
pub mod error;
pub mod fefferman;
pub mod group;
pub mod kostant;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod pathgeom;
pub mod polynomial;
pub mod random;
pub mod scalar;
pub mod sparse;

pub use algebra::{AlgebraDescriptor, Family, GradeSelection, GradedElement, SymplecticForm};
pub use error::{Error, Result};
pub use matrix::Mat;
pub use scalar::{Rational, Scalar};

/// Algebra element with exact rational entries.
pub type ExactElement = algebra::GradedElement<Rational>;
/// Algebra element with `f64` entries.
pub type FloatElement = algebra::GradedElement<f64>;
/// Group element with exact rational entries (products of nilpotent exponentials).
pub type ExactGroupElement = group::GroupElement<Rational>;
/// Group element with `f64` entries.
pub type FloatGroupElement = group::GroupElement<f64>;
/// Exact cochain in `Λ^k p_+ ⊗ g`.
pub type ExactCochain = kostant::CochainElement;
/// Curvature map with exact values.
pub type ExactCurvatureMap = fefferman::CurvatureMap<Rational>;
/// Affine connection with exact polynomial coefficients.
pub type ExactConnection = connections::AffineConnection<Rational>;
/// Affine connection with `f64` polynomial coefficients.
pub type FloatConnection = connections::AffineConnection<f64>;
