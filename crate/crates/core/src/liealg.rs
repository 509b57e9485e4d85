//! Lie algebra structure tables and their matrix representations.
//!
//! A [`StructureTable`] records the commutation relations and optional
//! adjoint relations of a finite list of abstract generators. A
//! [`Representation`] assigns a square sparse matrix to each generator
//! name. [`check_representation`] verifies every relation, exactly over
//! exact scalars and against a pinned tolerance over floats.
//!
//! Truncated infinite-dimensional representations (Bargmann ladders,
//! monomial bases) are handled with an explicit safety mask: rows and
//! columns whose basis vector can escape the truncation window under a
//! single raising step are excluded from quadratic residuals, everything
//! else must vanish identically.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::{GaussRat, Rat};
use crate::linop::SparseOp;
use crate::scalar::{Backend, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LieError {
    #[error("representation does not assign an operator to generator `{0}`")]
    MissingGenerator(String),
    #[error("operator for `{name}` is {rows}x{cols}, expected {dim}x{dim}")]
    WrongShape { name: String, rows: usize, cols: usize, dim: usize },
}

/// Abstract presentation of a Lie algebra with distinguished basis.
///
/// Brackets are stored for index pairs `i < j` as linear combinations of
/// the generators; antisymmetry fills in the rest, and absent pairs
/// commute. Adjoint relations, when present, give the adjoint of each
/// generator as a linear combination.
#[derive(Clone, Debug)]
pub struct StructureTable<T> {
    name: String,
    gens: Vec<String>,
    brackets: BTreeMap<(usize, usize), Vec<(usize, T)>>,
    adjoints: Option<Vec<Vec<(usize, T)>>>,
}

impl<T: Scalar> StructureTable<T> {
    pub fn new(name: &str, gens: &[&str]) -> Self {
        let gens: Vec<String> = gens.iter().map(|s| s.to_string()).collect();
        let mut seen = gens.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), gens.len(), "duplicate generator name");
        StructureTable { name: name.to_string(), gens, brackets: BTreeMap::new(), adjoints: None }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    fn index_of(&self, name: &str) -> usize {
        self.gen_index(name)
            .unwrap_or_else(|| panic!("unknown generator `{name}` in table `{}`", self.name))
    }

    /// Declare `[a, b] = sum_k c_k g_k`; `a` must precede `b` in the
    /// generator list.
    pub fn set_bracket(&mut self, a: &str, b: &str, combo: &[(&str, T)]) {
        let i = self.index_of(a);
        let j = self.index_of(b);
        assert!(i < j, "bracket must be declared in generator order: [{a}, {b}]");
        let combo: Vec<(usize, T)> = combo
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (self.index_of(g), c.clone()))
            .collect();
        self.brackets.insert((i, j), combo);
    }

    /// Declare the adjoint of every generator at once, in generator
    /// order.
    pub fn set_adjoints(&mut self, adj: Vec<Vec<(&str, T)>>) {
        assert_eq!(adj.len(), self.gens.len(), "one adjoint per generator");
        let resolved = adj
            .into_iter()
            .map(|combo| combo.into_iter().map(|(g, c)| (self.index_of(g), c)).collect())
            .collect();
        self.adjoints = Some(resolved);
    }

    pub fn has_adjoints(&self) -> bool {
        self.adjoints.is_some()
    }

    /// `[g_i, g_j]` as a linear combination, using antisymmetry.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<(usize, T)> {
        if i == j {
            return Vec::new();
        }
        if i < j {
            self.brackets.get(&(i, j)).cloned().unwrap_or_default()
        } else {
            self.brackets
                .get(&(j, i))
                .cloned()
                .unwrap_or_default()
                .into_iter()
                .map(|(k, c)| (k, -c))
                .collect()
        }
    }

    pub fn adjoint_of(&self, i: usize) -> Option<&[(usize, T)]> {
        self.adjoints.as_ref().map(|a| a[i].as_slice())
    }

    /// Direct sum over `sites` commuting copies; generator `g` of copy
    /// `s` is named `g_s` and brackets across copies vanish.
    pub fn direct_sum(&self, sites: usize) -> Self {
        let k = self.gens.len();
        let gens: Vec<String> = (0..sites)
            .flat_map(|s| self.gens.iter().map(move |g| format!("{g}_{s}")))
            .collect();
        let mut brackets = BTreeMap::new();
        for s in 0..sites {
            for (&(i, j), combo) in &self.brackets {
                let shifted = combo.iter().map(|(g, c)| (g + s * k, c.clone())).collect();
                brackets.insert((i + s * k, j + s * k), shifted);
            }
        }
        let adjoints = self.adjoints.as_ref().map(|adj| {
            (0..sites)
                .flat_map(|s| {
                    adj.iter().map(move |combo| {
                        combo.iter().map(|(g, c)| (g + s * k, c.clone())).collect()
                    })
                })
                .collect()
        });
        StructureTable {
            name: format!("{}^{sites}", self.name),
            gens: gens.iter().map(|s| s.to_string()).collect(),
            brackets,
            adjoints,
        }
    }
}

/// Concrete operators for the generators of a [`StructureTable`].
#[derive(Clone)]
pub struct Representation<T> {
    dim: usize,
    ops: BTreeMap<String, SparseOp<T>>,
    /// `safe[b]` marks basis vectors that cannot leave the truncation
    /// window under one raising step; quadratic residuals are only
    /// meaningful on safe rows and columns. All-true when the
    /// representation is exactly closed.
    safe: Vec<bool>,
}

impl<T: Scalar> Representation<T> {
    pub fn new(dim: usize) -> Self {
        Representation { dim, ops: BTreeMap::new(), safe: vec![true; dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, name: &str, op: SparseOp<T>) {
        assert_eq!((op.rows(), op.cols()), (self.dim, self.dim), "operator shape mismatch");
        self.ops.insert(name.to_string(), op);
    }

    pub fn op(&self, name: &str) -> Option<&SparseOp<T>> {
        self.ops.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.ops.keys()
    }

    pub fn set_safe(&mut self, safe: Vec<bool>) {
        assert_eq!(safe.len(), self.dim, "mask length mismatch");
        self.safe = safe;
    }

    /// Marks the top `margin` basis indices unsafe (prefix truncation).
    pub fn mark_top_unsafe(&mut self, margin: usize) {
        for b in self.safe.iter_mut().rev().take(margin) {
            *b = false;
        }
    }

    pub fn safe_mask(&self) -> &[bool] {
        &self.safe
    }

    pub fn safe_count(&self) -> usize {
        self.safe.iter().filter(|&&b| b).count()
    }

    fn restrict_safe(&self, op: &SparseOp<T>) -> SparseOp<T> {
        let mut out = SparseOp::zero(op.rows(), op.cols());
        for (r, c, v) in op.iter() {
            if self.safe[r] && self.safe[c] {
                out.set(r, c, v.clone());
            }
        }
        out
    }
}

/// Outcome of verifying a representation against its structure table.
#[derive(Clone, Debug)]
pub struct RepReport {
    pub commutation_pass: bool,
    /// `None` when the table declares no adjoint relations.
    pub adjoint_pass: Option<bool>,
    pub worst_commutation: f64,
    pub worst_adjoint: f64,
    /// Human-readable descriptions of the failing relations.
    pub failures: Vec<String>,
}

impl RepReport {
    pub fn pass(&self) -> bool {
        self.commutation_pass && self.adjoint_pass.unwrap_or(true)
    }
}

/// Verify all brackets and adjoint relations of `table` in `rep`.
///
/// Exact scalars must give identically zero residuals; floats are
/// compared entrywise against `tol`. Bracket residuals are restricted to
/// the safe mask of `rep`, adjoint residuals are linear in the
/// generators and checked on the full matrix.
pub fn check_representation<T: Scalar>(
    table: &StructureTable<T>,
    rep: &Representation<T>,
    tol: f64,
) -> Result<RepReport, LieError> {
    let mut ops = Vec::with_capacity(table.gens().len());
    for g in table.gens() {
        let op = rep.op(g).ok_or_else(|| LieError::MissingGenerator(g.clone()))?;
        if (op.rows(), op.cols()) != (rep.dim(), rep.dim()) {
            return Err(LieError::WrongShape {
                name: g.clone(),
                rows: op.rows(),
                cols: op.cols(),
                dim: rep.dim(),
            });
        }
        ops.push(op);
    }
    let n = ops.len();
    let accept = |worst: f64| match T::BACKEND {
        Backend::Exact => worst == 0.0,
        Backend::Float => worst <= tol,
    };

    let mut report = RepReport {
        commutation_pass: true,
        adjoint_pass: table.has_adjoints().then_some(true),
        worst_commutation: 0.0,
        worst_adjoint: 0.0,
        failures: Vec::new(),
    };

    for i in 0..n {
        for j in (i + 1)..n {
            let mut residual = ops[i].commutator(ops[j]);
            for (k, c) in table.bracket(i, j) {
                residual = residual.sub(&ops[k].scale(&c));
            }
            let worst = rep.restrict_safe(&residual).max_magnitude();
            report.worst_commutation = report.worst_commutation.max(worst);
            if !accept(worst) {
                report.commutation_pass = false;
                report.failures.push(format!(
                    "[{}, {}] residual magnitude {worst:.3e}",
                    table.gens()[i],
                    table.gens()[j]
                ));
            }
        }
    }

    if let Some(adj) = &table.adjoints {
        for (i, combo) in adj.iter().enumerate() {
            let mut residual = ops[i].adjoint();
            for (k, c) in combo {
                residual = residual.sub(&ops[*k].scale(c));
            }
            let worst = residual.max_magnitude();
            report.worst_adjoint = report.worst_adjoint.max(worst);
            if !accept(worst) {
                report.adjoint_pass = Some(false);
                report.failures.push(format!(
                    "({})* residual magnitude {worst:.3e}",
                    table.gens()[i]
                ));
            }
        }
    }

    Ok(report)
}

// ---------------------------------------------------------------------------
// Structure tables
// ---------------------------------------------------------------------------

fn two_i() -> GaussRat {
    GaussRat::new(Rat::from_int(0), Rat::from_int(2))
}

/// Compact real form in the symmetric basis:
/// `[sx, sy] = 2i sz` cyclically, all generators self-adjoint.
pub fn su2_xyz() -> StructureTable<GaussRat> {
    let mut t = StructureTable::new("su2", &["sx", "sy", "sz"]);
    t.set_bracket("sx", "sy", &[("sz", two_i())]);
    t.set_bracket("sy", "sz", &[("sx", two_i())]);
    t.set_bracket("sx", "sz", &[("sy", -two_i())]);
    t.set_adjoints(vec![
        vec![("sx", GaussRat::one())],
        vec![("sy", GaussRat::one())],
        vec![("sz", GaussRat::one())],
    ]);
    t
}

/// Non-compact form in the symmetric basis, with the sign placement the
/// pseudo-Pauli matrices actually satisfy: `[tx, ty] = 2i tz`,
/// `[ty, tz] = -2i tx`, `[tz, tx] = -2i ty`.
pub fn su11_xyz() -> StructureTable<GaussRat> {
    let mut t = StructureTable::new("su11", &["tx", "ty", "tz"]);
    t.set_bracket("tx", "ty", &[("tz", two_i())]);
    t.set_bracket("ty", "tz", &[("tx", -two_i())]);
    t.set_bracket("tx", "tz", &[("ty", two_i())]);
    t.set_adjoints(vec![
        vec![("tx", GaussRat::one())],
        vec![("ty", GaussRat::one())],
        vec![("tz", GaussRat::one())],
    ]);
    t
}

fn from_int<T: Scalar>(n: i64) -> T {
    T::from_rat(&Rat::from_int(n))
}

/// Ladder basis of the compact form:
/// `[j0, j+-] = +-j+-`, `[j-, j+] = -2 j0`, `(j-)* = j+`.
pub fn su2_ladder<T: Scalar>() -> StructureTable<T> {
    let mut t = StructureTable::new("su2-ladder", &["jm", "jp", "j0"]);
    t.set_bracket("jm", "jp", &[("j0", from_int(-2))]);
    t.set_bracket("jm", "j0", &[("jm", T::one())]);
    t.set_bracket("jp", "j0", &[("jp", -T::one())]);
    t.set_adjoints(vec![
        vec![("jp", T::one())],
        vec![("jm", T::one())],
        vec![("j0", T::one())],
    ]);
    t
}

/// Ladder basis of the non-compact form:
/// `[k0, k+-] = +-k+-`, `[k-, k+] = +2 k0`, `(k-)* = k+`.
pub fn su11_ladder<T: Scalar>() -> StructureTable<T> {
    let mut t = StructureTable::new("su11-ladder", &["km", "kp", "k0"]);
    t.set_bracket("km", "kp", &[("k0", from_int(2))]);
    t.set_bracket("km", "k0", &[("km", T::one())]);
    t.set_bracket("kp", "k0", &[("kp", -T::one())]);
    t.set_adjoints(vec![
        vec![("kp", T::one())],
        vec![("km", T::one())],
        vec![("k0", T::one())],
    ]);
    t
}

/// Conjugate of [`su11_ladder`]: every commutator order is reversed, so
/// `[k+, k-] = 2 k0` and `[k+-, k0] = +-k+-`. No adjoint relations are
/// imposed.
pub fn su11_conjugate<T: Scalar>() -> StructureTable<T> {
    let mut t = StructureTable::new("su11-conjugate", &["km", "kp", "k0"]);
    t.set_bracket("km", "kp", &[("k0", from_int(-2))]);
    t.set_bracket("km", "k0", &[("km", -T::one())]);
    t.set_bracket("kp", "k0", &[("kp", T::one())]);
    t
}

/// Heisenberg algebra: `[a-, a+] = a0` central,
/// `(a+-)* = +-a+-`, `(a0)* = a0`.
pub fn heisenberg<T: Scalar>() -> StructureTable<T> {
    let mut t = StructureTable::new("heisenberg", &["am", "ap", "a0"]);
    t.set_bracket("am", "ap", &[("a0", T::one())]);
    t.set_adjoints(vec![
        vec![("am", -T::one())],
        vec![("ap", T::one())],
        vec![("a0", T::one())],
    ]);
    t
}

// ---------------------------------------------------------------------------
// Representations
// ---------------------------------------------------------------------------

fn gauss_mat(entries: [[GaussRat; 2]; 2]) -> SparseOp<GaussRat> {
    SparseOp::from_rows(&[entries[0].to_vec(), entries[1].to_vec()])
}

/// Pauli matrices: the defining unitary representation of [`su2_xyz`].
pub fn pauli_rep() -> Representation<GaussRat> {
    let z = GaussRat::zero;
    let o = GaussRat::one;
    let i = GaussRat::i;
    let mut rep = Representation::new(2);
    rep.insert("sx", gauss_mat([[z(), o()], [o(), z()]]));
    rep.insert("sy", gauss_mat([[z(), -i()], [i(), z()]]));
    rep.insert("sz", gauss_mat([[o(), z()], [z(), -o()]]));
    rep
}

/// Pseudo-Pauli matrices: a faithful representation of [`su11_xyz`]
/// whose generators are deliberately not self-adjoint, so the adjoint
/// half of the check must fail.
pub fn pspauli_rep() -> Representation<GaussRat> {
    let z = GaussRat::zero;
    let o = GaussRat::one;
    let i = GaussRat::i;
    let mut rep = Representation::new(2);
    rep.insert("tx", gauss_mat([[z(), o()], [-o(), z()]]));
    rep.insert("ty", gauss_mat([[z(), i()], [i(), z()]]));
    rep.insert("tz", gauss_mat([[o(), z()], [z(), -o()]]));
    rep
}

/// Local spin-1/2 ladder matrices over the rationals, basis ordered by
/// occupation number 0, 1. These are simultaneously the index-1 ladder
/// representation and the per-site blocks of the exclusion process.
pub fn su2_local() -> (SparseOp<Rat>, SparseOp<Rat>, SparseOp<Rat>) {
    let mut jm = SparseOp::zero(2, 2);
    jm.set(0, 1, Rat::from_int(1));
    let mut jp = SparseOp::zero(2, 2);
    jp.set(1, 0, Rat::from_int(1));
    let mut j0 = SparseOp::zero(2, 2);
    let half = Rat::new(1, 2).unwrap();
    j0.set(0, 0, -half.clone());
    j0.set(1, 1, half);
    (jm, jp, j0)
}

/// Irreducible ladder representation of index `n` on the basis
/// `phi(-n/2), ..., phi(n/2)` in ascending order. The ladder
/// coefficients vanish at both ends, so no truncation mask is needed.
pub fn spin_rep(n: u32) -> Representation<f64> {
    let dim = n as usize + 1;
    let a = n as f64 / 2.0;
    let mut jm = SparseOp::zero(dim, dim);
    let mut jp = SparseOp::zero(dim, dim);
    let mut j0 = SparseOp::zero(dim, dim);
    for m in 0..dim {
        let k = m as f64 - a;
        j0.set(m, m, k);
        if m > 0 {
            // J- phi(k) = sqrt((n/2 - k + 1)(n/2 + k)) phi(k - 1).
            jm.set(m - 1, m, ((a - k + 1.0) * (a + k)).sqrt());
        }
        if m + 1 < dim {
            // J+ phi(k) = sqrt((n/2 - k)(n/2 + k + 1)) phi(k + 1).
            jp.set(m + 1, m, ((a - k) * (a + k + 1.0)).sqrt());
        }
    }
    let mut rep = Representation::new(dim);
    rep.insert("jm", jm);
    rep.insert("jp", jp);
    rep.insert("j0", j0);
    rep
}

/// Lowest-weight ladder representation of the non-compact form with
/// Bargmann index `r`, truncated to the basis `phi(0), ..., phi(cap)`.
/// The top basis vector is masked: one raising step leaves the window.
pub fn bargmann_rep(r: f64, cap: usize) -> Representation<f64> {
    assert!(r > 0.0, "Bargmann index must be positive");
    let dim = cap + 1;
    let mut km = SparseOp::zero(dim, dim);
    let mut kp = SparseOp::zero(dim, dim);
    let mut k0 = SparseOp::zero(dim, dim);
    for m in 0..dim {
        let k = m as f64;
        k0.set(m, m, k + r);
        if m > 0 {
            // K- phi(k) = sqrt(k (k - 1 + 2r)) phi(k - 1).
            km.set(m - 1, m, (k * (k - 1.0 + 2.0 * r)).sqrt());
        }
        if m + 1 < dim {
            // K+ phi(k) = sqrt((k + 1)(k + 2r)) phi(k + 1).
            kp.set(m + 1, m, ((k + 1.0) * (k + 2.0 * r)).sqrt());
        }
    }
    let mut rep = Representation::new(dim);
    rep.insert("km", km);
    rep.insert("kp", kp);
    rep.insert("k0", k0);
    rep.mark_top_unsafe(1);
    rep
}

/// Local ladder matrices of the conjugate non-compact representation on
/// occupation numbers `0..local_dim`, acting on functions of the
/// occupation number:
/// `K- f(x) = x f(x-1)`, `K+ f(x) = (alpha+x) f(x+1)`,
/// `K0 f(x) = (alpha/2 + x) f(x)`.
pub fn su11_local(alpha: &Rat, local_dim: usize) -> (SparseOp<Rat>, SparseOp<Rat>, SparseOp<Rat>) {
    let mut km = SparseOp::zero(local_dim, local_dim);
    let mut kp = SparseOp::zero(local_dim, local_dim);
    let mut k0 = SparseOp::zero(local_dim, local_dim);
    let half = Rat::new(1, 2).unwrap();
    for x in 0..local_dim {
        let xr = Rat::from_int(x as i64);
        k0.set(x, x, &(alpha * &half) + &xr);
        if x > 0 {
            km.set(x, x - 1, xr.clone());
        }
        if x + 1 < local_dim {
            kp.set(x, x + 1, alpha + &xr);
        }
    }
    (km, kp, k0)
}

/// Single-site conjugate representation with the top row masked; checked
/// against [`su11_conjugate`].
pub fn conjugate_rep(alpha: &Rat, cap: usize) -> Representation<Rat> {
    let dim = cap + 1;
    let (km, kp, k0) = su11_local(alpha, dim);
    let mut rep = Representation::new(dim);
    rep.insert("km", km);
    rep.insert("kp", kp);
    rep.insert("k0", k0);
    rep.mark_top_unsafe(1);
    rep
}

/// Heisenberg pair on the monomial coefficient basis `1, x, ..., x^cap`:
/// differentiation lowers degree, multiplication by `x` raises it.
/// Commutation holds on the masked block; the adjoint relations fail by
/// design because the monomial basis is not orthonormal for the ambient
/// inner product.
pub fn heisenberg_monomial_rep(cap: usize) -> Representation<Rat> {
    let dim = cap + 1;
    let mut am = SparseOp::zero(dim, dim);
    let mut ap = SparseOp::zero(dim, dim);
    for k in 0..dim {
        if k > 0 {
            am.set(k - 1, k, Rat::from_int(k as i64));
        }
        if k + 1 < dim {
            ap.set(k + 1, k, Rat::from_int(1));
        }
    }
    let mut rep = Representation::new(dim);
    rep.insert("am", am);
    rep.insert("ap", ap);
    rep.insert("a0", SparseOp::identity(dim));
    rep.mark_top_unsafe(1);
    rep
}

/// Embed a local operator at `site` of a product space with the given
/// per-site dimensions; site 0 varies slowest, matching lexicographic
/// configuration indexing.
pub fn lift_site_op<T: Scalar>(
    local: &SparseOp<T>,
    site: usize,
    dims: &[usize],
) -> SparseOp<T> {
    assert!(site < dims.len(), "site {site} out of range");
    assert_eq!(local.rows(), dims[site], "local operator does not match site dimension");
    let mut op = SparseOp::identity(1);
    for (i, &d) in dims.iter().enumerate() {
        let factor = if i == site { local.clone() } else { SparseOp::identity(d) };
        op = op.kron(&factor);
    }
    op
}

/// Sum of one local operator lifted to every site.
pub fn collective_op<T: Scalar>(local: &SparseOp<T>, dims: &[usize]) -> SparseOp<T> {
    let total: usize = dims.iter().product();
    let mut op = SparseOp::zero(total, total);
    for site in 0..dims.len() {
        op = op.add(&lift_site_op(local, site, dims));
    }
    op
}

/// Per-site ladder triple of the exclusion process on `sites` binary
/// sites: operators `jm_i`, `jp_i`, `j0_i` on the full product space,
/// satisfying the direct sum of [`su2_ladder`] exactly.
pub fn sep_site_rep(sites: usize) -> Representation<Rat> {
    let dims = vec![2usize; sites];
    let (jm, jp, j0) = su2_local();
    let mut rep = Representation::new(1 << sites);
    for i in 0..sites {
        rep.insert(&format!("jm_{i}"), lift_site_op(&jm, i, &dims));
        rep.insert(&format!("jp_{i}"), lift_site_op(&jp, i, &dims));
        rep.insert(&format!("j0_{i}"), lift_site_op(&j0, i, &dims));
    }
    rep
}

/// Per-site conjugate ladder triple of the inclusion process on a
/// product of truncated occupation spaces, one `alpha` per site.
/// Configurations with any coordinate at the local top are masked.
pub fn sip_site_rep(alphas: &[Rat], local_dim: usize) -> Representation<Rat> {
    let sites = alphas.len();
    let dims = vec![local_dim; sites];
    let total: usize = dims.iter().product();
    let mut rep = Representation::new(total);
    for (i, alpha) in alphas.iter().enumerate() {
        let (km, kp, k0) = su11_local(alpha, local_dim);
        rep.insert(&format!("km_{i}"), lift_site_op(&km, i, &dims));
        rep.insert(&format!("kp_{i}"), lift_site_op(&kp, i, &dims));
        rep.insert(&format!("k0_{i}"), lift_site_op(&k0, i, &dims));
    }
    let mut safe = vec![true; total];
    for (g, flag) in safe.iter_mut().enumerate() {
        let mut rest = g;
        for _ in 0..sites {
            if rest % local_dim == local_dim - 1 {
                *flag = false;
            }
            rest /= local_dim;
        }
    }
    rep.set_safe(safe);
    rep
}

// ---------------------------------------------------------------------------
// Casimir operators
// ---------------------------------------------------------------------------

/// Compact-form Casimir in ladder generators:
/// `2 (j+ j- + j- j+) + 4 (j0)^2`. On an irreducible representation of
/// index `n` this is the scalar `n (n + 2)`.
pub fn su2_casimir<T: Scalar>(rep: &Representation<T>) -> Result<SparseOp<T>, LieError> {
    let get = |n: &str| rep.op(n).ok_or_else(|| LieError::MissingGenerator(n.to_string()));
    let jm = get("jm")?;
    let jp = get("jp")?;
    let j0 = get("j0")?;
    let ladder = jp.matmul(jm).add(&jm.matmul(jp)).scale(&from_int::<T>(2));
    Ok(ladder.add(&j0.matmul(j0).scale(&from_int::<T>(4))))
}

/// Non-compact Casimir in ladder generators:
/// `(k0)^2 - (k+ k- + k- k+) / 2`. On the lowest-weight representation
/// with Bargmann index `r` this is the scalar `r (r - 1)`.
pub fn su11_casimir<T: Scalar>(rep: &Representation<T>) -> Result<SparseOp<T>, LieError> {
    let get = |n: &str| rep.op(n).ok_or_else(|| LieError::MissingGenerator(n.to_string()));
    let km = get("km")?;
    let kp = get("kp")?;
    let k0 = get("k0")?;
    let half = T::from_rat(&Rat::new(1, 2).unwrap());
    let ladder = kp.matmul(km).add(&km.matmul(kp)).scale(&half);
    Ok(k0.matmul(k0).sub(&ladder))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn rq(n: i64, d: i64) -> Rat {
        Rat::new(n, d).unwrap()
    }

    #[test]
    fn pauli_satisfies_su2() {
        let report = check_representation(&su2_xyz(), &pauli_rep(), 0.0).unwrap();
        assert!(report.pass(), "{:?}", report.failures);
        assert_eq!(report.adjoint_pass, Some(true));
    }

    #[test]
    fn pauli_casimir_is_three() {
        // sx^2 + sy^2 + sz^2 = 3 I, the index-1 scalar 1 * (1 + 2).
        let rep = pauli_rep();
        let sq = |n: &str| {
            let m = rep.op(n).unwrap();
            m.matmul(m)
        };
        let c = sq("sx").add(&sq("sy")).add(&sq("sz"));
        assert_eq!(c, SparseOp::identity(2).scale(&GaussRat::from_int(3)));
    }

    #[test]
    fn pspauli_commutes_but_is_not_unitary() {
        let report = check_representation(&su11_xyz(), &pspauli_rep(), 0.0).unwrap();
        assert!(report.commutation_pass, "{:?}", report.failures);
        assert_eq!(report.adjoint_pass, Some(false));
        assert!(report.worst_adjoint > 0.0);
    }

    #[test]
    fn pspauli_casimir_forms_agree() {
        // (k0)^2 - (k+ k- + k- k+)/2 equals (tx/2)^2 - (ty/2)^2 - (tz/2)^2
        // as a polynomial identity in the matrices, independent of the
        // commutation relations; on the pseudo-Pauli matrices both give
        // -I/4.
        let rep = pspauli_rep();
        let half = GaussRat::new(rq(1, 2), r(0));
        let tx = rep.op("tx").unwrap();
        let ty = rep.op("ty").unwrap();
        let tz = rep.op("tz").unwrap();
        let ih = GaussRat::new(r(0), rq(1, 2));
        let k0 = tx.scale(&half);
        let km = ty.scale(&half).sub(&tz.scale(&ih.clone()));
        let kp = ty.scale(&half).add(&tz.scale(&ih));
        let mut ladder_rep = Representation::new(2);
        ladder_rep.insert("km", km);
        ladder_rep.insert("kp", kp);
        ladder_rep.insert("k0", k0);
        let c = su11_casimir(&ladder_rep).unwrap();
        let quarter = GaussRat::new(rq(-1, 4), r(0));
        assert_eq!(c, SparseOp::identity(2).scale(&quarter));
        let sq = |m: &SparseOp<GaussRat>| m.matmul(m).scale(&GaussRat::new(rq(1, 4), r(0)));
        let xyz_form = sq(tx).sub(&sq(ty)).sub(&sq(tz));
        assert_eq!(c, xyz_form);
    }

    #[test]
    fn spin_reps_satisfy_ladder_relations() {
        for n in 1..=8u32 {
            let rep = spin_rep(n);
            let report = check_representation(&su2_ladder::<f64>(), &rep, 1e-12).unwrap();
            assert!(report.pass(), "index {n}: {:?}", report.failures);
            let c = su2_casimir(&rep).unwrap();
            let expect = (n * (n + 2)) as f64;
            let residual = c.sub(&SparseOp::identity(rep.dim()).scale(&expect));
            assert!(residual.max_magnitude() <= 1e-10, "index {n} Casimir");
        }
    }

    #[test]
    fn spin_one_matches_exclusion_local_blocks() {
        let rep = spin_rep(1);
        let (jm, jp, j0) = su2_local();
        assert_eq!(rep.op("jm").unwrap(), &jm.to_float());
        assert_eq!(rep.op("jp").unwrap(), &jp.to_float());
        assert_eq!(rep.op("j0").unwrap(), &j0.to_float());
    }

    #[test]
    fn bargmann_reps_satisfy_ladder_relations() {
        for &r_idx in &[0.5, 1.0, 1.75] {
            let rep = bargmann_rep(r_idx, 12);
            let report = check_representation(&su11_ladder::<f64>(), &rep, 1e-12).unwrap();
            assert!(report.pass(), "r = {r_idx}: {:?}", report.failures);
            let c = su11_casimir(&rep).unwrap();
            let expect = r_idx * (r_idx - 1.0);
            let residual = c.sub(&SparseOp::identity(rep.dim()).scale(&expect));
            let masked_worst = {
                let mut worst: f64 = 0.0;
                for (row, col, v) in residual.iter() {
                    if rep.safe_mask()[row] && rep.safe_mask()[col] {
                        worst = worst.max(v.abs());
                    }
                }
                worst
            };
            assert!(masked_worst <= 1e-10, "r = {r_idx} Casimir residual {masked_worst}");
        }
    }

    #[test]
    fn conjugate_rep_satisfies_reversed_relations() {
        for alpha in [r(1), rq(3, 2)] {
            let rep = conjugate_rep(&alpha, 12);
            let report = check_representation(&su11_conjugate::<Rat>(), &rep, 0.0).unwrap();
            assert!(report.pass(), "alpha = {alpha}: {:?}", report.failures);
            assert_eq!(report.adjoint_pass, None);
        }
    }

    #[test]
    fn conjugate_rep_fails_unreversed_relations() {
        // Negative control: the reversed relations differ from the direct
        // ones by a sign, so checking against the direct table must fail.
        let rep = conjugate_rep(&r(1), 6);
        let report = check_representation(&su11_ladder::<Rat>(), &rep, 0.0).unwrap();
        assert!(!report.commutation_pass);
    }

    #[test]
    fn heisenberg_monomial_commutation() {
        let rep = heisenberg_monomial_rep(10);
        let report = check_representation(&heisenberg::<Rat>(), &rep, 0.0).unwrap();
        assert!(report.commutation_pass, "{:?}", report.failures);
        // The monomial basis is not orthonormal in the ambient inner
        // product, so the adjoint relations fail here by design.
        assert_eq!(report.adjoint_pass, Some(false));
    }

    #[test]
    fn sep_site_rep_satisfies_direct_sum() {
        let table = su2_ladder::<Rat>().direct_sum(3);
        let rep = sep_site_rep(3);
        let report = check_representation(&table, &rep, 0.0).unwrap();
        assert!(report.pass(), "{:?}", report.failures);
    }

    #[test]
    fn sip_site_rep_satisfies_direct_sum_on_safe_block() {
        let alphas = [r(1), rq(3, 2)];
        let table = su11_conjugate::<Rat>().direct_sum(2);
        let rep = sip_site_rep(&alphas, 5);
        let report = check_representation(&table, &rep, 0.0).unwrap();
        assert!(report.commutation_pass, "{:?}", report.failures);
        assert_eq!(rep.safe_count(), 16);
    }

    #[test]
    fn collective_operators_form_ladder_triple() {
        // Summed site ladders again satisfy the compact relations;
        // this is the symmetry behind the self-duality of the exclusion
        // process.
        let dims = [2usize, 2, 2];
        let (jm, jp, j0) = su2_local();
        let cm = collective_op(&jm, &dims);
        let cp = collective_op(&jp, &dims);
        let c0 = collective_op(&j0, &dims);
        let mut rep = Representation::new(8);
        rep.insert("jm", cm);
        rep.insert("jp", cp);
        rep.insert("j0", c0);
        let report = check_representation(&su2_ladder::<Rat>(), &rep, 0.0).unwrap();
        assert!(report.pass(), "{:?}", report.failures);
    }

    #[test]
    fn lift_site_op_places_factor_correctly() {
        let (_, jp, _) = su2_local();
        let lifted = lift_site_op(&jp, 1, &[2, 2]);
        let expect = SparseOp::identity(2).kron(&jp);
        assert_eq!(lifted, expect);
    }

    #[test]
    fn missing_generator_is_reported() {
        let rep = Representation::<Rat>::new(2);
        let err = check_representation(&su2_ladder::<Rat>(), &rep, 0.0).unwrap_err();
        assert_eq!(err, LieError::MissingGenerator("jm".to_string()));
    }

    proptest! {
        #[test]
        fn spin_adjoint_pairs_exactly(n in 1u32..16) {
            // The ladder coefficients of J- and J+ are the same products
            // read from opposite ends, so the adjoint relation holds with
            // exact float equality.
            let rep = spin_rep(n);
            let jm = rep.op("jm").unwrap();
            let jp = rep.op("jp").unwrap();
            prop_assert_eq!(&jm.adjoint(), jp);
        }

        #[test]
        fn direct_sum_brackets_restrict_to_sites(s in 1usize..4) {
            let table = su2_ladder::<Rat>().direct_sum(s);
            // Cross-site brackets vanish, same-site brackets replicate.
            for i in 0..s {
                for j in 0..s {
                    let jm_i = table.gen_index(&format!("jm_{i}")).unwrap();
                    let jp_j = table.gen_index(&format!("jp_{j}")).unwrap();
                    let combo = table.bracket(jm_i, jp_j);
                    if i == j {
                        prop_assert_eq!(combo.len(), 1);
                        let j0_i = table.gen_index(&format!("j0_{i}")).unwrap();
                        prop_assert_eq!(combo[0].clone(), (j0_i, r(-2)));
                    } else {
                        prop_assert!(combo.is_empty());
                    }
                }
            }
        }
    }
}
