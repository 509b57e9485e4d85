//! Polynomials and differential operators on them.
//!
//! Generators of diffusions act on polynomial test functions, where exact
//! verification is possible degree by degree: a [`DiffOp`] with polynomial
//! coefficients maps polynomials to polynomials, composition is carried
//! out symbolically (Leibniz rule), and residuals are polynomial
//! identities checked coefficient-wise.
//!
//! [`ExpKern`] extends the reach to duality functions of the form
//! `p(x, y) exp(-s x y)`: differentiation stays inside the class, so a
//! second-order generator applied to such a kernel is again such a kernel
//! and equality is decidable exactly.
//!
//! Degree caps are arguments of the checks that need them, never global
//! state; operators themselves are degree-free.

use std::collections::BTreeMap;
use std::fmt;

use crate::exactnum::Rat;
use crate::linop::OperatorAlgebra;
use crate::scalar::Scalar;
use crate::statespace::SiteGraph;

/// Multivariate polynomial with coefficients in `T`.
///
/// Keys are exponent vectors of fixed length `vars`; zero coefficients are
/// never stored.
#[derive(Clone, PartialEq)]
pub struct Poly<T> {
    vars: usize,
    coeffs: BTreeMap<Vec<u32>, T>,
}

impl<T: Scalar> Poly<T> {
    pub fn zero(vars: usize) -> Self {
        Poly { vars, coeffs: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: T) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn one(vars: usize) -> Self {
        Self::constant(vars, T::one())
    }

    /// The monomial `c * prod_i v_i^exps[i]`.
    pub fn monomial(exps: Vec<u32>, c: T) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The variable `v_i`.
    pub fn var(vars: usize, i: usize) -> Self {
        assert!(i < vars, "variable {i} out of range for {vars} variables");
        let mut exps = vec![0; vars];
        exps[i] = 1;
        Self::monomial(exps, T::one())
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree; zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> T {
        self.coeffs.get(exps).cloned().unwrap_or_else(T::zero)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: T) {
        assert_eq!(exps.len(), self.vars, "exponent arity mismatch");
        if c.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&exps).unwrap_or_else(T::zero);
        let next = cur + c;
        if !next.is_zero() {
            self.coeffs.insert(exps, next);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.vars, rhs.vars, "variable arity mismatch");
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(e, c)| (e.clone(), -c.clone())).collect();
        Poly { vars: self.vars, coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, v) in self.terms() {
            out.add_term(e.clone(), c.clone() * v.clone());
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.vars, rhs.vars, "variable arity mismatch");
        let mut out = Self::zero(self.vars);
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(var < self.vars, "variable {var} out of range");
        let mut out = Self::zero(self.vars);
        for (e, c) in self.terms() {
            if e[var] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[var] -= 1;
            let factor = T::from_rat(&Rat::from_int(e[var] as i64));
            out.add_term(exps, factor * c.clone());
        }
        out
    }

    /// Iterated partials, one order per variable.
    pub fn derivative_multi(&self, orders: &[u32]) -> Self {
        assert_eq!(orders.len(), self.vars, "order arity mismatch");
        let mut out = self.clone();
        for (var, &k) in orders.iter().enumerate() {
            for _ in 0..k {
                out = out.derivative(var);
            }
        }
        out
    }

    /// Re-embed into a wider variable set; `place[i]` is the new index of
    /// old variable `i`.
    pub fn embed(&self, total: usize, place: &[usize]) -> Self {
        assert_eq!(place.len(), self.vars, "placement arity mismatch");
        assert!(place.iter().all(|&p| p < total), "placement out of range");
        let mut out = Self::zero(total);
        for (e, c) in self.terms() {
            let mut exps = vec![0u32; total];
            for (i, &p) in place.iter().enumerate() {
                exps[p] += e[i];
            }
            out.add_term(exps, c.clone());
        }
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        let mut out = Poly::zero(self.vars);
        for (e, c) in self.terms() {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// `(c0 + c1 v_i)^n`, the workhorse for duality functions like
    /// `(1 - x)^n`.
    pub fn affine_power(vars: usize, i: usize, c0: T, c1: T, n: u32) -> Self {
        let base = Poly::constant(vars, c0).add(&Poly::var(vars, i).scale(&c1));
        let mut acc = Poly::one(vars);
        for _ in 0..n {
            acc = acc.mul(&base);
        }
        acc
    }
}

impl<T: Scalar> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    write!(f, "*v{i}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// Linear differential operator with polynomial coefficients:
/// `sum_a p_a(v) d^a`, keyed by the derivative multi-order `a`.
#[derive(Clone, PartialEq)]
pub struct DiffOp<T> {
    vars: usize,
    terms: BTreeMap<Vec<u32>, Poly<T>>,
}

impl<T: Scalar> DiffOp<T> {
    pub fn zero(vars: usize) -> Self {
        DiffOp { vars, terms: BTreeMap::new() }
    }

    pub fn identity(vars: usize) -> Self {
        Self::multiplication(Poly::one(vars))
    }

    /// Multiplication by a polynomial (derivative order zero).
    pub fn multiplication(p: Poly<T>) -> Self {
        let vars = p.vars();
        let mut op = Self::zero(vars);
        op.add_term(vec![0; vars], p);
        op
    }

    /// The bare partial derivative `d/dv_i`.
    pub fn derivative(vars: usize, var: usize) -> Self {
        assert!(var < vars, "variable {var} out of range");
        let mut orders = vec![0; vars];
        orders[var] = 1;
        let mut op = Self::zero(vars);
        op.add_term(orders, Poly::one(vars));
        op
    }

    /// `p(v) * d^orders`.
    pub fn term(orders: Vec<u32>, p: Poly<T>) -> Self {
        let mut op = Self::zero(p.vars());
        op.add_term(orders, p);
        op
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Poly<T>)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, orders: Vec<u32>, p: Poly<T>) {
        assert_eq!(orders.len(), self.vars, "order arity mismatch");
        assert_eq!(p.vars(), self.vars, "coefficient arity mismatch");
        if p.is_zero() {
            return;
        }
        let cur = self.terms.remove(&orders).unwrap_or_else(|| Poly::zero(self.vars));
        let next = cur.add(&p);
        if !next.is_zero() {
            self.terms.insert(orders, next);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.vars, rhs.vars, "variable arity mismatch");
        let mut out = self.clone();
        for (o, p) in rhs.terms() {
            out.add_term(o.clone(), p.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(o, p)| (o.clone(), p.neg())).collect();
        DiffOp { vars: self.vars, terms }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero(self.vars);
        for (o, p) in self.terms() {
            out.add_term(o.clone(), p.scale(c));
        }
        out
    }

    /// Apply to a polynomial.
    pub fn apply(&self, f: &Poly<T>) -> Poly<T> {
        assert_eq!(self.vars, f.vars(), "variable arity mismatch");
        let mut out = Poly::zero(self.vars);
        for (orders, p) in self.terms() {
            out = out.add(&p.mul(&f.derivative_multi(orders)));
        }
        out
    }

    /// Symbolic composition `self after rhs`: apply `rhs` first.
    ///
    /// Expanded with the generalized Leibniz rule
    /// `d^a (q g) = sum_{c <= a} binom(a, c) (d^c q) (d^(a-c) g)`,
    /// so the result is again a polynomial-coefficient operator.
    pub fn compose(&self, rhs: &Self) -> Self {
        assert_eq!(self.vars, rhs.vars, "variable arity mismatch");
        let mut out = Self::zero(self.vars);
        for (a, p) in self.terms() {
            for (b, q) in rhs.terms() {
                for c in multi_indices_upto(a) {
                    let dq = q.derivative_multi(&c);
                    if dq.is_zero() {
                        continue;
                    }
                    let weight = T::from_rat(&multi_binomial(a, &c));
                    let orders: Vec<u32> =
                        a.iter().zip(&c).zip(b).map(|((ai, ci), bi)| ai - ci + bi).collect();
                    out.add_term(orders, p.mul(&dq).scale(&weight));
                }
            }
        }
        out
    }

    /// Re-embed into a wider variable set, mapping old variable `i` to
    /// `place[i]` in both coefficients and derivative orders.
    pub fn embed(&self, total: usize, place: &[usize]) -> Self {
        assert_eq!(place.len(), self.vars, "placement arity mismatch");
        let mut out = Self::zero(total);
        for (o, p) in self.terms() {
            let mut orders = vec![0u32; total];
            for (i, &pl) in place.iter().enumerate() {
                orders[pl] += o[i];
            }
            out.add_term(orders, p.embed(total, place));
        }
        out
    }

    /// Apply to an exponential-kernel element (two-variable context).
    pub fn apply_kern(&self, k: &ExpKern<T>) -> ExpKern<T> {
        assert_eq!(self.vars, 2, "kernel application needs a two-variable operator");
        let mut out = ExpKern::zero(k.s.clone());
        for (orders, p) in self.terms() {
            let mut cur = k.clone();
            for _ in 0..orders[0] {
                cur = cur.dx();
            }
            for _ in 0..orders[1] {
                cur = cur.dy();
            }
            out = out.add(&cur.mul_poly(p));
        }
        out
    }
}

impl<T: Scalar> fmt::Debug for DiffOp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (o, p) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{p:?}] d^{o:?}")?;
        }
        Ok(())
    }
}

impl<T: Scalar> OperatorAlgebra<T> for DiffOp<T> {
    fn alg_add(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }

    fn alg_compose(&self, rhs: &Self) -> Self {
        self.compose(rhs)
    }

    fn alg_scale(&self, c: &T) -> Self {
        self.scale(c)
    }
}

/// All multi-indices `c` with `0 <= c <= bounds` componentwise.
fn multi_indices_upto(bounds: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &b in bounds {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for prefix in &out {
            for v in 0..=b {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn multi_binomial(a: &[u32], c: &[u32]) -> Rat {
    let mut acc: u64 = 1;
    for (&ai, &ci) in a.iter().zip(c) {
        acc *= num_integer::binomial(ai as u64, ci as u64);
    }
    Rat::from_int(acc as i64)
}

/// Element `p(x, y) * exp(-s x y)` with polynomial `p` in two variables.
///
/// Closed under x- and y-derivatives, which is what makes exponential
/// self-duality functions of diffusions exactly checkable.
#[derive(Clone, PartialEq)]
pub struct ExpKern<T> {
    /// Polynomial prefactor in the variables (x, y) = (v0, v1).
    pub poly: Poly<T>,
    /// Exponent coefficient; the kernel is `exp(-s x y)`.
    pub s: Rat,
}

impl<T: Scalar> ExpKern<T> {
    pub fn zero(s: Rat) -> Self {
        ExpKern { poly: Poly::zero(2), s }
    }

    /// The bare kernel `exp(-s x y)`.
    pub fn bare(s: Rat) -> Self {
        ExpKern { poly: Poly::one(2), s }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// d/dx: the product rule gives `(p_x - s y p) exp(-s x y)`.
    pub fn dx(&self) -> Self {
        let sy = Poly::var(2, 1).scale(&T::from_rat(&self.s));
        ExpKern {
            poly: self.poly.derivative(0).sub(&sy.mul(&self.poly)),
            s: self.s.clone(),
        }
    }

    /// d/dy: symmetric to [`Self::dx`].
    pub fn dy(&self) -> Self {
        let sx = Poly::var(2, 0).scale(&T::from_rat(&self.s));
        ExpKern {
            poly: self.poly.derivative(1).sub(&sx.mul(&self.poly)),
            s: self.s.clone(),
        }
    }

    pub fn mul_poly(&self, p: &Poly<T>) -> Self {
        ExpKern { poly: self.poly.mul(p), s: self.s.clone() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.s, rhs.s, "mixing exponential kernels with different exponents");
        ExpKern { poly: self.poly.add(&rhs.poly), s: self.s.clone() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.s, rhs.s, "mixing exponential kernels with different exponents");
        ExpKern { poly: self.poly.sub(&rhs.poly), s: self.s.clone() }
    }
}

impl<T: Scalar> fmt::Debug for ExpKern<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}] * exp(-{} x y)", self.poly, self.s)
    }
}

// ---------------------------------------------------------------------------
// Generator builders on polynomial spaces
// ---------------------------------------------------------------------------

/// Wright-Fisher diffusion generator with selection `s`:
/// `x (1 - x) d^2/dx^2 + s x (1 - x) d/dx` on one variable.
pub fn wf_generator<T: Scalar>(s: &Rat) -> DiffOp<T> {
    let x = Poly::var(1, 0);
    let x1mx = x.sub(&x.mul(&x));
    let mut op = DiffOp::term(vec![2], x1mx.clone());
    op.add_term(vec![1], x1mx.scale(&T::from_rat(s)));
    op
}

/// Brownian energy process generator on the sites of `graph` with
/// parameters `alphas`: for every unordered pair the drift part
/// `(alpha_j z_i - alpha_i z_j)(d_j - d_i)` and diffusion part
/// `z_i z_j (d_j - d_i)^2`, each at half the edge rate, summed over both
/// orientations.
pub fn bep_generator<T: Scalar>(graph: &SiteGraph, alphas: &[Rat]) -> DiffOp<T> {
    let n = graph.sites();
    assert_eq!(alphas.len(), n, "one alpha per site");
    let half = Rat::new(1, 2).unwrap();
    let mut op = DiffOp::zero(n);
    for (i, j, q) in graph.ordered_pairs() {
        let w = T::from_rat(&(&half * q));
        let zi = Poly::<T>::var(n, i);
        let zj = Poly::<T>::var(n, j);
        let drift = zi
            .scale(&T::from_rat(&alphas[j]))
            .sub(&zj.scale(&T::from_rat(&alphas[i])));
        let mut dj = vec![0u32; n];
        dj[j] = 1;
        let mut di = vec![0u32; n];
        di[i] = 1;
        op.add_term(dj.clone(), drift.scale(&w));
        op.add_term(di.clone(), drift.scale(&w).neg());
        // (d_j - d_i)^2 = d_i^2 + d_j^2 - 2 d_i d_j on smooth functions.
        let zizj = zi.mul(&zj).scale(&w);
        let mut dii = vec![0u32; n];
        dii[i] = 2;
        let mut djj = vec![0u32; n];
        djj[j] = 2;
        let mut dij = vec![0u32; n];
        dij[i] += 1;
        dij[j] += 1;
        op.add_term(dii, zizj.clone());
        op.add_term(djj, zizj.clone());
        op.add_term(dij, zizj.scale(&T::from_rat(&Rat::from_int(-2))));
    }
    op
}

/// Heisenberg pair on one variable: lowering `d/dx` and raising `x *`,
/// whose commutator is the identity. `cap` is the degree budget the
/// caller intends to verify on; inputs of degree at most `cap - 1` keep
/// all intermediate results within degree `cap`.
pub struct HeisenbergBlocks<T> {
    pub lower: DiffOp<T>,
    pub raise: DiffOp<T>,
    pub cap: u32,
}

pub fn heisenberg_blocks<T: Scalar>(cap: u32) -> HeisenbergBlocks<T> {
    HeisenbergBlocks {
        lower: DiffOp::derivative(1, 0),
        raise: DiffOp::multiplication(Poly::var(1, 0)),
        cap,
    }
}

/// Ladder triple of the non-compact algebra realized by differential
/// operators at site `i` of an `n`-variable polynomial space:
/// lowering `z d^2 + alpha d`, raising `z *`, neutral `z d + alpha/2`.
pub fn su11_poly_blocks<T: Scalar>(
    n: usize,
    i: usize,
    alpha: &Rat,
) -> (DiffOp<T>, DiffOp<T>, DiffOp<T>) {
    let z = Poly::<T>::var(n, i);
    let mut d1 = vec![0u32; n];
    d1[i] = 1;
    let mut d2 = vec![0u32; n];
    d2[i] = 2;
    let mut lower = DiffOp::term(d2, z.clone());
    lower.add_term(d1.clone(), Poly::constant(n, T::from_rat(alpha)));
    let raise = DiffOp::multiplication(z.clone());
    let mut neutral = DiffOp::term(d1, z);
    let half_alpha = alpha * &Rat::new(1, 2).unwrap();
    neutral.add_term(vec![0; n], Poly::constant(n, T::from_rat(&half_alpha)));
    (lower, raise, neutral)
}
