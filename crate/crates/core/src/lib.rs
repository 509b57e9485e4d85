//! Construction and verification of Markov process dualities.
//!
//! The crate builds generators of interacting particle systems (exclusion,
//! inclusion, Lloyd-Sudbury reaction-diffusion models, moment duals of
//! diffusions), assembles duality functions and intertwining kernels from
//! Lie-algebra building blocks, and then verifies the resulting operator
//! identities:
//!
//! * exactly, in arbitrary-precision rational arithmetic, whenever the state
//!   space is finite or the operators act on polynomials;
//! * in floating point with pinned tolerances, for representations whose
//!   matrix entries are irrational (spin ladders, Bargmann ladders);
//! * statistically, by Monte Carlo simulation, for duality statements that
//!   involve continuous-state diffusions.
//!
//! Everything numeric is generic over the scalar type through the
//! [`scalar::Scalar`] trait, so the same sparse-operator and polynomial
//! machinery runs over `f64` and over the exact fields in [`exactnum`].
//! Concrete aliases for the common instantiations are exported below.

pub mod duality;
pub mod exactnum;
pub mod liealg;
pub mod linop;
pub mod models;
pub mod polyop;
pub mod scalar;
pub mod simulate;
pub mod statespace;

pub use exactnum::{GaussRat, QuadExt, Rat};
pub use scalar::{Backend, Scalar};

/// Sparse operator over exact rationals (the default verification backend).
pub type RatOp = linop::SparseOp<Rat>;
/// Sparse operator over Gaussian rationals (complex structure constants).
pub type GaussOp = linop::SparseOp<GaussRat>;
/// Sparse operator over double floats (spin ladders, semigroups).
pub type FloatOp = linop::SparseOp<f64>;
/// Multivariate polynomial with rational coefficients.
pub type RatPoly = polyop::Poly<Rat>;
/// Differential operator with rational polynomial coefficients.
pub type RatDiffOp = polyop::DiffOp<Rat>;
