//! Exact scalar arithmetic underlying all verification.
//!
//! Three field types, each implementing [`crate::scalar::Scalar`]:
//!
//! * [`Rat`]: arbitrary-precision rational, always reduced, denominator
//!   always positive. Rates, duality parameters, and generator entries
//!   live here.
//! * [`GaussRat`]: Gaussian rational `re + im*i`, needed for structure
//!   constants like `2i` and for complex matrix representations.
//! * [`QuadExt`]: quadratic extension `a + b*sqrt(radicand)` with Gaussian
//!   rational components and a fixed nonnegative rational radicand per
//!   context. Binary operations require compatible radicands: equal, or
//!   one operand purely rational (`b = 0`). Mismatched radicands panic;
//!   there is deliberately no implicit rewriting of one radical into
//!   another.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::{Backend, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("zero denominator in rational literal `{0}`")]
    ZeroDenominator(String),
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("negative radicand `{0}` for quadratic extension")]
    NegativeRadicand(String),
}

/// Debug formatting that reuses Display; exact values read better unquoted.
macro_rules! fmt_debug_via_display {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{self}")
        }
    };
}

// ---------------------------------------------------------------------------
// Rat
// ---------------------------------------------------------------------------

/// Arbitrary-precision rational number, always in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    /// Build `num/den`; fails on a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Self, NumError> {
        if den == 0 {
            return Err(NumError::ZeroDenominator(format!("{num}/{den}")));
        }
        Ok(Rat(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    /// Parse `"p/q"`, an integer, or a finite decimal such as `"0.25"`.
    pub fn parse(s: &str) -> Result<Self, NumError> {
        s.parse()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rat(self.0.pow(exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `n!` as a rational, for series coefficients.
    pub fn factorial(n: u64) -> Self {
        let mut acc = BigInt::one();
        for k in 2..=n {
            acc *= BigInt::from(k);
        }
        Rat::from_big(acc)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fmt_debug_via_display!();
}

impl FromStr for Rat {
    type Err = NumError;

    fn from_str(s: &str) -> Result<Self, NumError> {
        let t = s.trim();
        if t.is_empty() {
            return Err(NumError::Malformed(s.to_string()));
        }
        if let Some((num, den)) = t.split_once('/') {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| NumError::Malformed(s.to_string()))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| NumError::Malformed(s.to_string()))?;
            if d.is_zero() {
                return Err(NumError::ZeroDenominator(s.to_string()));
            }
            return Ok(Rat(BigRational::new(n, d)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
            let i: BigInt = if int == "-" || int.is_empty() {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| NumError::Malformed(s.to_string()))?
            };
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(NumError::Malformed(s.to_string()));
            }
            let f: BigInt = frac.parse().map_err(|_| NumError::Malformed(s.to_string()))?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            return Ok(Rat(BigRational::new(i * &scale + BigInt::from(sign) * f, scale)));
        }
        let n: BigInt = t.parse().map_err(|_| NumError::Malformed(s.to_string()))?;
        Ok(Rat(BigRational::from_integer(n)))
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.0.is_zero(), "division by zero rational");
        Rat(self.0 / rhs.0)
    }
}

impl Div<&Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.0.is_zero(), "division by zero rational");
        Rat(&self.0 / &rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Zero for Rat {
    fn zero() -> Self {
        Rat(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Rat {
    fn one() -> Self {
        Rat(BigRational::one())
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl Scalar for Rat {
    const BACKEND: Backend = Backend::Exact;

    fn conj(&self) -> Self {
        self.clone()
    }

    fn try_inv(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Rat(self.0.recip()))
        }
    }

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

// ---------------------------------------------------------------------------
// GaussRat
// ---------------------------------------------------------------------------

/// Gaussian rational `re + im*i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        GaussRat { re, im: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::from_rat(Rat::from_int(n))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::one() }
    }

    /// `n*i` for integer `n`.
    pub fn im_int(n: i64) -> Self {
        GaussRat { re: Rat::zero(), im: Rat::from_int(n) }
    }

    pub fn norm_sq(&self) -> Rat {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussRat {
    fmt_debug_via_display!();
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        GaussRat { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        GaussRat { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        GaussRat {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    fn div(self, rhs: GaussRat) -> GaussRat {
        Scalar::try_inv(&rhs).expect("division by zero Gaussian rational") * self
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        GaussRat { re: Rat::one(), im: Rat::zero() }
    }
}

impl Scalar for GaussRat {
    const BACKEND: Backend = Backend::Exact;

    fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    fn try_inv(&self) -> Option<Self> {
        let n = self.norm_sq();
        let inv = n.try_inv()?;
        Some(GaussRat {
            re: &self.re * &inv,
            im: &(-self.im.clone()) * &inv,
        })
    }

    fn from_rat(r: &Rat) -> Self {
        GaussRat::from_rat(r.clone())
    }

    fn magnitude(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
}

// ---------------------------------------------------------------------------
// QuadExt
// ---------------------------------------------------------------------------

/// Element `a + b*sqrt(rad)` of a quadratic extension of the Gaussian
/// rationals, with `rad` a fixed nonnegative rational per context.
///
/// A value with `b = 0` carries no radical and is compatible with any
/// radicand; otherwise binary operations demand equal radicands and panic
/// on mismatch.
#[derive(Clone)]
pub struct QuadExt {
    pub a: GaussRat,
    pub b: GaussRat,
    rad: Rat,
}

impl PartialEq for QuadExt {
    fn eq(&self, other: &Self) -> bool {
        // The radicand only matters while a radical part is present.
        self.a == other.a
            && self.b == other.b
            && (self.b.is_zero() || self.rad == other.rad)
    }
}

impl QuadExt {
    pub fn new(a: GaussRat, b: GaussRat, rad: Rat) -> Result<Self, NumError> {
        if rad.is_negative() {
            return Err(NumError::NegativeRadicand(rad.to_string()));
        }
        Ok(QuadExt { a, b, rad })
    }

    pub fn from_gauss(a: GaussRat) -> Self {
        QuadExt { a, b: GaussRat::zero(), rad: Rat::zero() }
    }

    pub fn rational(r: Rat) -> Self {
        QuadExt::from_gauss(GaussRat::from_rat(r))
    }

    /// `sqrt(rad)` itself.
    pub fn root(rad: Rat) -> Result<Self, NumError> {
        QuadExt::new(GaussRat::zero(), GaussRat::one(), rad)
    }

    pub fn radicand(&self) -> &Rat {
        &self.rad
    }

    /// Whether the value lies in the Gaussian-rational subfield.
    pub fn is_rational_part_only(&self) -> bool {
        self.b.is_zero()
    }

    /// The common radicand of two operands; panics when both carry
    /// distinct nontrivial radicals.
    fn joint_rad(&self, rhs: &Self) -> Rat {
        if self.b.is_zero() {
            return rhs.rad.clone();
        }
        if rhs.b.is_zero() {
            return self.rad.clone();
        }
        assert!(
            self.rad == rhs.rad,
            "mismatched radicands {} vs {} in quadratic extension arithmetic",
            self.rad,
            rhs.rad
        );
        self.rad.clone()
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "({})*sqrt({})", self.b, self.rad);
        }
        write!(f, "{}+({})*sqrt({})", self.a, self.b, self.rad)
    }
}

impl fmt::Debug for QuadExt {
    fmt_debug_via_display!();
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: QuadExt) -> QuadExt {
        let rad = self.joint_rad(&rhs);
        QuadExt { a: self.a + rhs.a, b: self.b + rhs.b, rad }
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: QuadExt) -> QuadExt {
        let rad = self.joint_rad(&rhs);
        QuadExt { a: self.a - rhs.a, b: self.b - rhs.b, rad }
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: QuadExt) -> QuadExt {
        let rad = self.joint_rad(&rhs);
        let root_sq = GaussRat::from_rat(rad.clone());
        QuadExt {
            a: self.a.clone() * rhs.a.clone() + self.b.clone() * rhs.b.clone() * root_sq,
            b: self.a * rhs.b + self.b * rhs.a,
            rad,
        }
    }
}

impl Div for QuadExt {
    type Output = QuadExt;
    fn div(self, rhs: QuadExt) -> QuadExt {
        let inv = Scalar::try_inv(&rhs).expect("division by zero quadratic extension element");
        self * inv
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -self.a, b: -self.b, rad: self.rad }
    }
}

impl Zero for QuadExt {
    fn zero() -> Self {
        QuadExt::from_gauss(GaussRat::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadExt {
    fn one() -> Self {
        QuadExt::from_gauss(GaussRat::one())
    }
}

impl Scalar for QuadExt {
    const BACKEND: Backend = Backend::Exact;

    fn conj(&self) -> Self {
        // The radicand is nonnegative rational, so sqrt(rad) is real and
        // conjugation acts componentwise.
        QuadExt { a: self.a.conj(), b: self.b.conj(), rad: self.rad.clone() }
    }

    fn try_inv(&self) -> Option<Self> {
        // (a + b sqrt(r))^{-1} = (a - b sqrt(r)) / (a^2 - b^2 r).
        let root_sq = GaussRat::from_rat(self.rad.clone());
        let denom = self.a.clone() * self.a.clone() - self.b.clone() * self.b.clone() * root_sq;
        let inv = denom.try_inv()?;
        Some(QuadExt {
            a: self.a.clone() * inv.clone(),
            b: -(self.b.clone() * inv),
            rad: self.rad.clone(),
        })
    }

    fn from_rat(r: &Rat) -> Self {
        QuadExt::rational(r.clone())
    }

    fn magnitude(&self) -> f64 {
        let root = self.rad.to_f64().sqrt();
        let re = self.a.re.to_f64() + self.b.re.to_f64() * root;
        let im = self.a.im.to_f64() + self.b.im.to_f64() * root;
        re.hypot(im)
    }
}
