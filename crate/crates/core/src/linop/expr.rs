//! Symbolic operator expressions and dual derivation.
//!
//! An [`OpExpr`] records how a generator is assembled from named atomic
//! operators: sums, scalar multiples, and products. Products are stored in
//! writing order, so `Product([A, B])` evaluates to the matrix product
//! `A * B`, the rightmost factor acting first on a vector.
//!
//! The payoff is [`derive_dual_expr`]: given a rename map sending each
//! atom to its dual block, the dual generator expression is obtained by
//! renaming every atom and reversing the factor order of every product.
//! Sums and scalar multiples pass through unchanged. Evaluating the
//! derived expression in an environment of dual blocks then produces the
//! dual generator, which downstream checks verify independently.
//!
//! Evaluation is generic over [`OperatorAlgebra`], so the same expression
//! can be instantiated with sparse matrices on a finite state space or
//! with differential operators acting on polynomials.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalar::Scalar;

use super::SparseOp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("atom `{0}` is not bound in the environment")]
    UnboundAtom(String),
    #[error("atom `{0}` has no entry in the rename map")]
    UnmappedAtom(String),
}

/// Expression tree over named atomic operators.
#[derive(Clone, Debug, PartialEq)]
pub enum OpExpr<T> {
    Atom(String),
    Identity,
    Scale(T, Box<OpExpr<T>>),
    Sum(Vec<OpExpr<T>>),
    Product(Vec<OpExpr<T>>),
}

impl<T: Scalar> OpExpr<T> {
    pub fn atom(name: &str) -> Self {
        OpExpr::Atom(name.to_string())
    }

    pub fn scale(c: T, e: OpExpr<T>) -> Self {
        OpExpr::Scale(c, Box::new(e))
    }

    /// `c * I`, handy for affine pieces like `s I + A`.
    pub fn constant(c: T) -> Self {
        OpExpr::Scale(c, Box::new(OpExpr::Identity))
    }

    /// Evaluate in an environment binding atom names to operators.
    ///
    /// `identity` supplies the algebra's unit (its dimension or variable
    /// context cannot be inferred from the expression alone). An empty
    /// product evaluates to the identity, an empty sum to zero.
    pub fn eval<A: OperatorAlgebra<T>>(
        &self,
        env: &BTreeMap<String, A>,
        identity: &A,
    ) -> Result<A, ExprError> {
        match self {
            OpExpr::Atom(name) => env
                .get(name)
                .cloned()
                .ok_or_else(|| ExprError::UnboundAtom(name.clone())),
            OpExpr::Identity => Ok(identity.clone()),
            OpExpr::Scale(c, inner) => Ok(inner.eval(env, identity)?.alg_scale(c)),
            OpExpr::Sum(terms) => {
                let mut acc = identity.alg_scale(&T::zero());
                for t in terms {
                    acc = acc.alg_add(&t.eval(env, identity)?);
                }
                Ok(acc)
            }
            OpExpr::Product(factors) => {
                let mut acc = identity.clone();
                for f in factors {
                    acc = acc.alg_compose(&f.eval(env, identity)?);
                }
                Ok(acc)
            }
        }
    }

    /// Atom names appearing in the expression, sorted and deduplicated.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            OpExpr::Atom(name) => out.push(name.clone()),
            OpExpr::Identity => {}
            OpExpr::Scale(_, inner) => inner.collect_atoms(out),
            OpExpr::Sum(v) | OpExpr::Product(v) => {
                for e in v {
                    e.collect_atoms(out);
                }
            }
        }
    }
}

/// Derive the dual expression: rename every atom through `map` and reverse
/// the factor order of every product, recursively. Scalars and sums are
/// untouched. Fails if an atom is missing from the map.
pub fn derive_dual_expr<T: Scalar>(
    expr: &OpExpr<T>,
    map: &BTreeMap<String, String>,
) -> Result<OpExpr<T>, ExprError> {
    Ok(match expr {
        OpExpr::Atom(name) => OpExpr::Atom(
            map.get(name)
                .ok_or_else(|| ExprError::UnmappedAtom(name.clone()))?
                .clone(),
        ),
        OpExpr::Identity => OpExpr::Identity,
        OpExpr::Scale(c, inner) => OpExpr::Scale(c.clone(), Box::new(derive_dual_expr(inner, map)?)),
        OpExpr::Sum(terms) => OpExpr::Sum(
            terms
                .iter()
                .map(|t| derive_dual_expr(t, map))
                .collect::<Result<_, _>>()?,
        ),
        OpExpr::Product(factors) => {
            let mut rev: Vec<OpExpr<T>> = factors
                .iter()
                .map(|f| derive_dual_expr(f, map))
                .collect::<Result<_, _>>()?;
            rev.reverse();
            OpExpr::Product(rev)
        }
    })
}

/// The minimal algebra interface expression evaluation needs.
pub trait OperatorAlgebra<T: Scalar>: Clone {
    fn alg_add(&self, rhs: &Self) -> Self;
    /// `self` composed after `rhs` (matrix product `self * rhs`).
    fn alg_compose(&self, rhs: &Self) -> Self;
    fn alg_scale(&self, c: &T) -> Self;
}

impl<T: Scalar> OperatorAlgebra<T> for SparseOp<T> {
    fn alg_add(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }

    fn alg_compose(&self, rhs: &Self) -> Self {
        self.matmul(rhs)
    }

    fn alg_scale(&self, c: &T) -> Self {
        self.scale(c)
    }
}
