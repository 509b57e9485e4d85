//! Sparse linear operators over an arbitrary scalar backend.
//!
//! [`SparseOp`] stores explicit nonzero entries in row-major order and is
//! generic over [`Scalar`], so the same code path serves exact rational,
//! Gaussian rational, quadratic-extension, and `f64` matrices. Mixing
//! scalar types is a compile error; promotion between backends is always
//! an explicit [`SparseOp::map`].
//!
//! Shape errors (adding or multiplying incompatible dimensions) are
//! programming errors, not data errors, and panic with a message naming
//! both shapes. Everything reachable from file input validates dimensions
//! before calling in here.
//!
//! Exact solvers ([`null_space`], [`rank`]) require an exact backend and
//! refuse `f64`. The elimination is straightforward Gauss-Jordan over the
//! field: entries are always-reduced rationals (or extensions thereof), so
//! pivot division is exact and no fraction-free bookkeeping is needed.

pub mod expr;

pub use expr::{derive_dual_expr, OpExpr, OperatorAlgebra};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::exactnum::Rat;
use crate::scalar::{Backend, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinopError {
    #[error("operator is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not nilpotent: power {0} is still nonzero")]
    NotNilpotent(usize),
    #[error("exact scalar backend required for {0}")]
    ExactBackendRequired(&'static str),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("negative time {0} for semigroup evaluation")]
    NegativeTime(f64),
    #[error("uniformization series needed more than {0} terms")]
    SeriesBudget(usize),
}

/// Sparse matrix with entries in a scalar field `T`.
///
/// Zero entries are never stored; iteration order is row-major and
/// deterministic, which keeps every downstream report reproducible.
#[derive(Clone, PartialEq)]
pub struct SparseOp<T> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> SparseOp<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseOp { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|i| ((i, i), T::one())).collect();
        SparseOp { rows: n, cols: n, entries }
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        it: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Self {
        let mut op = Self::zero(rows, cols);
        for (r, c, v) in it {
            op.add_to(r, c, v);
        }
        op
    }

    /// Dense row-major construction, mostly for tests and small kernels.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut op = Self::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                op.set(i, j, v.clone());
            }
        }
        op
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.check_index(r, c);
        self.entries.get(&(r, c)).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.check_index(r, c);
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: T) {
        self.check_index(r, c);
        if v.is_zero() {
            return;
        }
        let cur = self.entries.remove(&(r, c)).unwrap_or_else(T::zero);
        let next = cur + v;
        if !next.is_zero() {
            self.entries.insert((r, c), next);
        }
    }

    fn check_index(&self, r: usize, c: usize) {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of range for {}x{} operator",
            self.rows,
            self.cols
        );
    }

    /// Row-major iteration over stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    /// Stored entries of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &T)> {
        self.entries
            .range((r, 0)..=(r, usize::MAX))
            .map(|(&(_, c), v)| (c, v))
    }

    pub fn transpose(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&(r, c), v)| ((c, r), v.clone()))
            .collect();
        SparseOp { rows: self.cols, cols: self.rows, entries }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&(r, c), v)| ((c, r), v.conj()))
            .collect();
        SparseOp { rows: self.cols, cols: self.rows, entries }
    }

    pub fn neg(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&k, v)| (k, -v.clone()))
            .collect();
        SparseOp { rows: self.rows, cols: self.cols, entries }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "adding {}x{} to {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        let mut out = self.clone();
        for (&(r, c), v) in &rhs.entries {
            out.add_to(r, c, v.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero(self.rows, self.cols);
        }
        let entries = self
            .entries
            .iter()
            .filter_map(|(&k, v)| {
                let w = c.clone() * v.clone();
                if w.is_zero() {
                    None
                } else {
                    Some((k, w))
                }
            })
            .collect();
        SparseOp { rows: self.rows, cols: self.cols, entries }
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert!(
            self.cols == rhs.rows,
            "multiplying {}x{} by {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        let mut out = Self::zero(self.rows, rhs.cols);
        for (&(r, k), a) in &self.entries {
            for (c, b) in rhs.row(k) {
                out.add_to(r, c, a.clone() * b.clone());
            }
        }
        out
    }

    /// `self * rhs - rhs * self`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    /// Kronecker product; block `(r1, c1)` scaled by `self[r1, c1]`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.rows * rhs.rows, self.cols * rhs.cols);
        for (&(r1, c1), a) in &self.entries {
            for (&(r2, c2), b) in &rhs.entries {
                out.set(r1 * rhs.rows + r2, c1 * rhs.cols + c2, a.clone() * b.clone());
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "vector length {} vs {} columns", v.len(), self.cols);
        let mut out = vec![T::zero(); self.rows];
        for (&(r, c), a) in &self.entries {
            let term = a.clone() * v[c].clone();
            let cur = std::mem::replace(&mut out[r], T::zero());
            out[r] = cur + term;
        }
        out
    }

    /// Row-vector-matrix product `v * self`.
    pub fn left_apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows, "vector length {} vs {} rows", v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (&(r, c), a) in &self.entries {
            let term = v[r].clone() * a.clone();
            let cur = std::mem::replace(&mut out[c], T::zero());
            out[c] = cur + term;
        }
        out
    }

    /// Entry-wise conversion to another scalar type, dropping new zeros.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SparseOp<U> {
        let mut out = SparseOp::zero(self.rows, self.cols);
        for (&(r, c), v) in &self.entries {
            out.set(r, c, f(v));
        }
        out
    }

    /// Largest entry magnitude, 0 for the empty matrix.
    pub fn max_magnitude(&self) -> f64 {
        self.entries.values().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// Restrict to a subset of rows (entries outside are dropped; the shape
    /// is kept so indices remain comparable).
    pub fn restrict_rows(&self, keep: &dyn Fn(usize) -> bool) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(&(r, _), _)| keep(r))
            .map(|(&k, v)| (k, v.clone()))
            .collect();
        SparseOp { rows: self.rows, cols: self.cols, entries }
    }

    /// Entries sorted by descending magnitude, for witness reporting.
    pub fn worst_entries(&self, cap: usize) -> Vec<(usize, usize, T)> {
        let mut all: Vec<_> = self.entries.iter().map(|(&(r, c), v)| (r, c, v.clone())).collect();
        all.sort_by(|a, b| {
            b.2.magnitude()
                .partial_cmp(&a.2.magnitude())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
        });
        all.truncate(cap);
        all
    }
}

impl SparseOp<Rat> {
    pub fn to_float(&self) -> SparseOp<f64> {
        self.map(|v| v.to_f64())
    }
}

impl<T: Scalar> fmt::Debug for SparseOp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SparseOp {}x{} ({} nnz)", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(f, "  ({r},{c}) = {v}")?;
        }
        Ok(())
    }
}

/// Sum of `A^n / n!` for nilpotent `A`; fails if `A^dim` is still nonzero.
pub fn exp_nilpotent<T: Scalar>(a: &SparseOp<T>) -> Result<SparseOp<T>, LinopError> {
    if !a.is_square() {
        return Err(LinopError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let mut acc = SparseOp::identity(n);
    let mut power = SparseOp::identity(n);
    for k in 1..=n {
        power = power.matmul(a);
        if power.is_empty() {
            return Ok(acc);
        }
        let coeff = T::from_rat(
            &Rat::factorial(k as u64)
                .try_inv()
                .expect("factorial is nonzero"),
        );
        acc = acc.add(&power.scale(&coeff));
    }
    // A nilpotent n x n matrix has nilpotency index at most n.
    Err(LinopError::NotNilpotent(n))
}

/// `exp(tL)` for a Markov generator `L`, by uniformization.
///
/// Writes `L = lambda (P - I)` with `P` substochastic-safe and sums the
/// Poisson-weighted powers of `P` until the neglected tail mass drops
/// below `tol`. The result is entry-wise accurate to `tol` because every
/// `P^n` has unit sup-norm.
pub fn uniformized_semigroup(
    l: &SparseOp<f64>,
    t: f64,
    tol: f64,
) -> Result<SparseOp<f64>, LinopError> {
    if !l.is_square() {
        return Err(LinopError::NotSquare { rows: l.rows, cols: l.cols });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LinopError::BadTolerance(tol));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(LinopError::NegativeTime(t));
    }
    let n = l.rows;
    let lambda = (0..n).map(|i| -l.get(i, i)).fold(0.0, f64::max);
    if lambda == 0.0 || t == 0.0 {
        return Ok(SparseOp::identity(n));
    }
    let p = SparseOp::identity(n).add(&l.scale(&(1.0 / lambda)));
    let lt = lambda * t;
    let mut weight = (-lt).exp();
    let mut covered = weight;
    let mut acc = SparseOp::<f64>::identity(n).scale(&weight);
    let mut power = SparseOp::<f64>::identity(n);
    const MAX_TERMS: usize = 1_000_000;
    let mut k = 0usize;
    while 1.0 - covered > tol {
        k += 1;
        if k > MAX_TERMS {
            return Err(LinopError::SeriesBudget(MAX_TERMS));
        }
        power = power.matmul(&p);
        weight *= lt / k as f64;
        covered += weight;
        acc = acc.add(&power.scale(&weight));
    }
    Ok(acc)
}

/// Basis of the right null space `{v : A v = 0}` over an exact field.
///
/// Gauss-Jordan elimination with exact pivot division; basis vectors are
/// indexed by free columns in ascending order, each normalized to have a 1
/// in its free coordinate. Dimensions up to 256 run on a dense array, the
/// sparse row representation takes over above that.
pub fn null_space<T: Scalar>(a: &SparseOp<T>) -> Result<Vec<Vec<T>>, LinopError> {
    if T::BACKEND != Backend::Exact {
        return Err(LinopError::ExactBackendRequired("null_space"));
    }
    let pivots = eliminate(a);
    let mut pivot_cols: Vec<usize> = pivots.keys().copied().collect();
    pivot_cols.sort_unstable();
    let mut basis = Vec::new();
    for free in 0..a.cols() {
        if pivots.contains_key(&free) {
            continue;
        }
        let mut v = vec![T::zero(); a.cols()];
        v[free] = T::one();
        for (&pc, row) in &pivots {
            // Pivot row reads: x_pc + sum_{c > pc, c free or pivot} row[c] x_c = 0.
            if let Some(coef) = row.get(&free) {
                v[pc] = -coef.clone();
            }
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Rank over an exact field.
pub fn rank<T: Scalar>(a: &SparseOp<T>) -> Result<usize, LinopError> {
    if T::BACKEND != Backend::Exact {
        return Err(LinopError::ExactBackendRequired("rank"));
    }
    Ok(eliminate(a).len())
}

/// Reduced row echelon form, returned as `pivot column -> row`, where each
/// row is a sparse map and the pivot entry is 1. Fully reduced: pivot
/// columns appear in no other row.
fn eliminate<T: Scalar>(a: &SparseOp<T>) -> BTreeMap<usize, BTreeMap<usize, T>> {
    let mut pivots: BTreeMap<usize, BTreeMap<usize, T>> = BTreeMap::new();
    for r in 0..a.rows() {
        let mut row: BTreeMap<usize, T> = a.row(r).map(|(c, v)| (c, v.clone())).collect();
        // Reduce against existing pivots until the leading column is fresh.
        loop {
            let Some((&lead, _)) = row.iter().next() else { break };
            let Some(pivot_row) = pivots.get(&lead) else { break };
            let factor = row.remove(&lead).expect("leading entry present");
            for (c, pv) in pivot_row {
                if *c == lead {
                    continue;
                }
                let delta = -(factor.clone() * pv.clone());
                add_sparse(&mut row, *c, delta);
            }
        }
        let Some((&lead, _)) = row.iter().next() else { continue };
        let inv = row
            .get(&lead)
            .and_then(|v| v.try_inv())
            .expect("nonzero field element has an inverse");
        let norm: BTreeMap<usize, T> = row
            .iter()
            .map(|(&c, v)| (c, v.clone() * inv.clone()))
            .collect();
        // Back-eliminate the new pivot column from all existing rows.
        for other in pivots.values_mut() {
            if let Some(coef) = other.remove(&lead) {
                for (&c, v) in &norm {
                    if c == lead {
                        continue;
                    }
                    add_sparse(other, c, -(coef.clone() * v.clone()));
                }
            }
        }
        pivots.insert(lead, norm);
    }
    pivots
}

fn add_sparse<T: Scalar>(row: &mut BTreeMap<usize, T>, c: usize, v: T) {
    if v.is_zero() {
        return;
    }
    let cur = row.remove(&c).unwrap_or_else(T::zero);
    let next = cur + v;
    if !next.is_zero() {
        row.insert(c, next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{GaussRat, Rat};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::new(Rat::from_int(re), Rat::from_int(im))
    }

    fn pauli_x() -> SparseOp<GaussRat> {
        SparseOp::from_rows(&[vec![g(0, 0), g(1, 0)], vec![g(1, 0), g(0, 0)]])
    }

    fn pauli_y() -> SparseOp<GaussRat> {
        SparseOp::from_rows(&[vec![g(0, 0), g(0, -1)], vec![g(0, 1), g(0, 0)]])
    }

    fn pauli_z() -> SparseOp<GaussRat> {
        SparseOp::from_rows(&[vec![g(1, 0), g(0, 0)], vec![g(0, 0), g(-1, 0)]])
    }

    #[test]
    fn pauli_commutator() {
        let lhs = pauli_x().commutator(&pauli_y());
        assert_eq!(lhs, pauli_z().scale(&g(0, 2)));
    }

    #[test]
    fn self_commutator_vanishes() {
        let a = pauli_x().add(&pauli_z().scale(&g(3, 1)));
        assert!(a.commutator(&a).is_empty());
    }

    #[test]
    fn adjoint_is_an_involution() {
        let a = SparseOp::from_entries(
            5,
            5,
            (0..5).flat_map(|i| (0..5).map(move |j| (i, j, g(i as i64 - j as i64, j as i64)))),
        );
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn adjoint_of_commutator() {
        let a = pauli_x().add(&pauli_y().scale(&g(2, 1)));
        let b = pauli_z().add(&pauli_x().scale(&g(0, 3)));
        assert_eq!(a.commutator(&b).adjoint(), b.adjoint().commutator(&a.adjoint()));
    }

    #[test]
    fn kron_with_identity_is_site_diagonal() {
        // diag(-1/2, 1/2) on the second of two binary sites: the lifted
        // matrix must be diagonal with entry depending on bit 2 of the
        // configuration index.
        let half = Rat::new(1, 2).unwrap();
        let j0 = SparseOp::from_rows(&[vec![-half.clone(), Rat::zero()], vec![Rat::zero(), half.clone()]]);
        let lifted = SparseOp::identity(2).kron(&j0);
        for idx in 0..4usize {
            let bit = (idx % 2) as i64;
            let expect = &Rat::from_int(bit) - &half;
            assert_eq!(lifted.get(idx, idx), expect);
        }
        assert_eq!(lifted.nnz(), 4);
    }

    #[test]
    fn kron_of_identities() {
        let i2: SparseOp<Rat> = SparseOp::identity(2);
        let i3: SparseOp<Rat> = SparseOp::identity(3);
        assert_eq!(i2.kron(&i3), SparseOp::identity(6));
    }

    // Dense 2x2 reference product, independent of SparseOp::matmul.
    fn dense_mul_2x2(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
        let mut out = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn from_array(a: &[[i64; 2]; 2]) -> SparseOp<Rat> {
        SparseOp::from_rows(&[vec![r(a[0][0]), r(a[0][1])], vec![r(a[1][0]), r(a[1][1])]])
    }

    #[test]
    fn kron_mixed_product_rule() {
        let (a, b, c, d) = ([[1, 2], [0, -1]], [[3, 0], [1, 1]], [[0, 2], [1, 0]], [[-1, 1], [2, 2]]);
        let lhs = from_array(&a).kron(&from_array(&b)).matmul(&from_array(&c).kron(&from_array(&d)));
        let rhs = from_array(&dense_mul_2x2(&a, &c)).kron(&from_array(&dense_mul_2x2(&b, &d)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn exp_of_single_site_raiser() {
        // Raising operator on one binary site (configuration order 0, 1):
        // row 1 reads f(0), so the only entry sits at (1, 0).
        let jp = SparseOp::from_entries(2, 2, [(1usize, 0usize, r(1))]);
        let e = exp_nilpotent(&jp).unwrap();
        assert_eq!(e, SparseOp::identity(2).add(&jp));
    }

    #[test]
    fn exp_nilpotent_of_zero() {
        let z: SparseOp<Rat> = SparseOp::zero(3, 3);
        assert_eq!(exp_nilpotent(&z).unwrap(), SparseOp::identity(3));
    }

    #[test]
    fn exp_nilpotent_rejects_identity() {
        let i: SparseOp<Rat> = SparseOp::identity(2);
        assert!(matches!(exp_nilpotent(&i), Err(LinopError::NotNilpotent(2))));
    }

    #[test]
    fn exp_of_collective_raiser_factorizes() {
        // On two binary sites, exp(J+_0 + J+_1) = exp(J+) kron exp(J+).
        let jp = SparseOp::from_entries(2, 2, [(1usize, 0usize, r(1))]);
        let i2: SparseOp<Rat> = SparseOp::identity(2);
        let collective = jp.kron(&i2).add(&i2.kron(&jp));
        let lhs = exp_nilpotent(&collective).unwrap();
        let site = SparseOp::identity(2).add(&jp);
        assert_eq!(lhs, site.kron(&site));
    }

    #[test]
    fn semigroup_at_time_zero() {
        let l = SparseOp::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]);
        assert_eq!(uniformized_semigroup(&l, 0.0, 1e-12).unwrap(), SparseOp::identity(2));
    }

    #[test]
    fn semigroup_of_flip_chain_matches_closed_form() {
        // Rate-1 flip between two states: P_t(0,0) = (1 + exp(-2t)) / 2.
        let l = SparseOp::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]);
        for &t in &[0.1, 0.7, 2.5] {
            let p = uniformized_semigroup(&l, t, 1e-12).unwrap();
            let stay = 0.5 * (1.0 + (-2.0 * t).exp());
            let flip = 0.5 * (1.0 - (-2.0 * t).exp());
            assert!((p.get(0, 0) - stay).abs() < 1e-10);
            assert!((p.get(0, 1) - flip).abs() < 1e-10);
            assert!((p.get(1, 0) - flip).abs() < 1e-10);
        }
    }

    #[test]
    fn semigroup_rows_are_stochastic() {
        let l = SparseOp::from_rows(&[
            vec![-2.0, 1.0, 1.0, 0.0],
            vec![0.5, -1.0, 0.25, 0.25],
            vec![0.0, 3.0, -3.0, 0.0],
            vec![1.0, 0.0, 1.0, -2.0],
        ]);
        let p = uniformized_semigroup(&l, 1.3, 1e-12).unwrap();
        for i in 0..4 {
            let sum: f64 = (0..4).map(|j| p.get(i, j)).sum();
            assert!((sum - 1.0).abs() < 1e-10, "row {i} sums to {sum}");
            for j in 0..4 {
                assert!(p.get(i, j) >= -1e-12);
            }
        }
    }

    #[test]
    fn null_space_of_zero_and_identity() {
        let z: SparseOp<Rat> = SparseOp::zero(3, 3);
        assert_eq!(null_space(&z).unwrap().len(), 3);
        let i: SparseOp<Rat> = SparseOp::identity(4);
        assert!(null_space(&i).unwrap().is_empty());
    }

    #[test]
    fn left_null_space_of_flip_generator() {
        let l = SparseOp::from_rows(&[vec![r(-1), r(1)], vec![r(1), r(-1)]]);
        let basis = null_space(&l.transpose()).unwrap();
        assert_eq!(basis.len(), 1);
        // The invariant row vector is proportional to (1, 1).
        assert_eq!(basis[0][0], basis[0][1]);
        assert!(!basis[0][0].is_zero());
        assert!(l.left_apply(&basis[0]).iter().all(|v| v.is_zero()));
    }

    #[test]
    fn null_space_vectors_satisfy_the_system() {
        let a = SparseOp::from_rows(&[
            vec![r(1), r(2), r(3), r(4)],
            vec![r(2), r(4), r(6), r(8)],
            vec![r(0), r(1), r(0), r(1)],
        ]);
        let basis = null_space(&a).unwrap();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(a.apply(v).iter().all(|x| x.is_zero()));
        }
        assert_eq!(rank(&a).unwrap(), 2);
    }

    #[test]
    fn null_space_requires_exact_backend() {
        let a: SparseOp<f64> = SparseOp::identity(2);
        assert!(matches!(
            null_space(&a),
            Err(LinopError::ExactBackendRequired("null_space"))
        ));
    }

    #[test]
    fn rank_of_diagonal() {
        let d = SparseOp::from_entries(3, 3, [(0usize, 0usize, r(1)), (2, 2, r(2))]);
        assert_eq!(rank(&d).unwrap(), 2);
    }

    #[test]
    #[should_panic(expected = "multiplying")]
    fn matmul_shape_mismatch_panics() {
        let a: SparseOp<Rat> = SparseOp::identity(2);
        let b: SparseOp<Rat> = SparseOp::identity(3);
        let _ = a.matmul(&b);
    }

    #[test]
    fn apply_and_left_apply() {
        let a = SparseOp::from_rows(&[vec![r(1), r(2)], vec![r(3), r(4)]]);
        assert_eq!(a.apply(&[r(1), r(1)]), vec![r(3), r(7)]);
        assert_eq!(a.left_apply(&[r(1), r(1)]), vec![r(4), r(6)]);
    }

    fn arb_mat(n: usize) -> impl Strategy<Value = SparseOp<Rat>> {
        proptest::collection::vec((-5i64..=5, 1i64..=3), n * n).prop_map(move |vals| {
            SparseOp::from_entries(
                n,
                n,
                vals.into_iter()
                    .enumerate()
                    .map(|(k, (p, q))| (k / n, k % n, Rat::new(p, q).unwrap())),
            )
        })
    }

    fn arb_strict_upper(n: usize) -> impl Strategy<Value = SparseOp<Rat>> {
        proptest::collection::vec(-4i64..=4, n * n).prop_map(move |vals| {
            SparseOp::from_entries(
                n,
                n,
                vals.into_iter()
                    .enumerate()
                    .filter(|(k, _)| k / n < k % n)
                    .map(|(k, v)| (k / n, k % n, r(v))),
            )
        })
    }

    proptest! {
        #[test]
        fn transpose_reverses_products(a in arb_mat(3), b in arb_mat(3)) {
            prop_assert_eq!(a.matmul(&b).transpose(), b.transpose().matmul(&a.transpose()));
        }

        #[test]
        fn kron_is_associative(a in arb_mat(2), b in arb_mat(2), c in arb_mat(2)) {
            prop_assert_eq!(a.kron(&b).kron(&c), a.kron(&b.kron(&c)));
        }

        #[test]
        fn exp_nilpotent_inverts(a in arb_strict_upper(4)) {
            let e = exp_nilpotent(&a).unwrap();
            let einv = exp_nilpotent(&a.neg()).unwrap();
            prop_assert_eq!(e.matmul(&einv), SparseOp::identity(4));
        }

        #[test]
        fn rank_plus_nullity(a in arb_mat(3)) {
            let rk = rank(&a).unwrap();
            let ns = null_space(&a).unwrap().len();
            prop_assert_eq!(rk + ns, 3);
        }
    }
}
