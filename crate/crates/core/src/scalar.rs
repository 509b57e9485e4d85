//! Scalar abstraction shared by every operator and polynomial type.
//!
//! Two backends exist. `Exact` scalars ([`crate::Rat`], [`crate::GaussRat`],
//! [`crate::QuadExt`]) admit only exact-zero residual checks; `Float`
//! scalars (`f64`) are compared against explicit tolerances. Mixing scalar
//! types in one operator is a compile error, so promotion between backends
//! is always an explicit `map`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::exactnum::Rat;

/// Which verification discipline a scalar type supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Residuals must vanish identically.
    Exact,
    /// Residuals are compared against a tolerance.
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Exact => write!(f, "exact"),
            Backend::Float => write!(f, "float64"),
        }
    }
}

/// Field scalar usable as an operator entry or polynomial coefficient.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + 'static
{
    const BACKEND: Backend;

    /// Complex conjugate; identity on real types.
    fn conj(&self) -> Self;

    /// Multiplicative inverse, `None` for zero (or non-finite floats).
    fn try_inv(&self) -> Option<Self>;

    /// Embed a rational constant.
    fn from_rat(r: &Rat) -> Self;

    /// Magnitude as `f64`, for tolerance checks and witness ranking.
    /// Exact types round; the result is only ever used for reporting
    /// and for float-backend comparisons.
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn conj(&self) -> Self {
        *self
    }

    fn try_inv(&self) -> Option<Self> {
        if *self == 0.0 || !self.is_finite() {
            None
        } else {
            Some(1.0 / self)
        }
    }

    fn from_rat(r: &Rat) -> Self {
        r.to_f64()
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}
