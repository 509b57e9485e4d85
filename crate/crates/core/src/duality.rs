//! Duality and intertwining verification, plus the derivation tools
//! that produce dual objects: q-duality parameter maps, thinning
//! kernels, time reversal, commutant symmetries, pathwise map duality,
//! and the polynomial-level dualities of diffusions.
//!
//! Exact backends certify identities by exact-zero residuals; the float
//! backend compares against explicit tolerances and is advisory.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::exactnum::Rat;
use crate::linop::{null_space, rank, uniformized_semigroup, LinopError, SparseOp};
use crate::models::{sip_generator, LsParams, ModelError, WITNESS_CAP};
use crate::polyop::{bep_generator, wf_generator, DiffOp, ExpKern, Poly};
use crate::scalar::{Backend, Scalar};
use crate::statespace::SiteGraph;

/// Largest operator dimension accepted by the vectorized commutant
/// solver; the linear system has the square of this many unknowns.
pub const COMMUTANT_DIM_BUDGET: usize = 64;

#[derive(Debug, Error)]
pub enum DualityError {
    #[error(
        "dimension mismatch: L is {l}x{l}, dual is {lhat}x{lhat}, D is {d_rows}x{d_cols}"
    )]
    DimensionMismatch { l: usize, lhat: usize, d_rows: usize, d_cols: usize },
    #[error(transparent)]
    Linop(#[from] LinopError),
    #[error("kernel entry ({row},{col}) = {value} is negative")]
    NegativeKernelEntry { row: usize, col: usize, value: String },
    #[error("kernel row {row} sums to {sum}, expected exactly 1")]
    KernelRowSum { row: usize, sum: String },
    #[error("q = 1 does not define a duality matrix")]
    QIsOne,
    #[error("thinning parameter p = {0} lies outside [0, 1]")]
    ThinningOutOfRange(String),
    #[error("measure entry {index} = {value} must be strictly positive")]
    NonpositiveMeasure { index: usize, value: String },
    #[error("measure is not invariant: (mu L)[{index}] = {value}")]
    NotInvariant { index: usize, value: String },
    #[error("operator does not commute with L; worst residual {worst}")]
    NotASymmetry { worst: f64 },
    #[error("base function Q is not a self-duality for L; worst residual {worst}")]
    BaseNotSelfDual { worst: f64 },
    #[error("operator dimension {dim} exceeds the commutant budget {budget}")]
    CommutantBudget { dim: usize, budget: usize },
    #[error("selection parameter s = {0} must be nonnegative")]
    NegativeSelection(String),
}

// ---------------------------------------------------------------------------
// Duality and intertwining reports
// ---------------------------------------------------------------------------

/// Outcome of a duality or intertwining residual check.
///
/// `residual` is already restricted to the admitted rows and columns;
/// entries on skipped rows or columns never count against `pass`.
#[derive(Clone, Debug)]
pub struct DualityReport<T: Scalar> {
    pub backend: Backend,
    pub residual: SparseOp<T>,
    pub pass: bool,
    /// The duality function is rank-deficient, so `pass` is vacuous on
    /// part of the space. Degenerate reports still pass.
    pub degenerate: bool,
    pub worst: f64,
    pub witnesses: Vec<(usize, usize, T)>,
    pub skipped_rows: BTreeSet<usize>,
    pub skipped_cols: BTreeSet<usize>,
}

fn mask_entries<T: Scalar>(
    op: &SparseOp<T>,
    skip_rows: &BTreeSet<usize>,
    skip_cols: &BTreeSet<usize>,
) -> SparseOp<T> {
    let mut out = SparseOp::zero(op.rows(), op.cols());
    for (r, c, v) in op.iter() {
        if !skip_rows.contains(&r) && !skip_cols.contains(&c) {
            out.set(r, c, v.clone());
        }
    }
    out
}

fn build_report<T: Scalar>(
    residual_full: &SparseOp<T>,
    d: &SparseOp<T>,
    tol: f64,
    skip_rows: &BTreeSet<usize>,
    skip_cols: &BTreeSet<usize>,
) -> DualityReport<T> {
    let residual = mask_entries(residual_full, skip_rows, skip_cols);
    let worst = residual.max_magnitude();
    let pass = match T::BACKEND {
        Backend::Exact => residual.is_empty(),
        Backend::Float => worst <= tol,
    };
    let degenerate = match T::BACKEND {
        Backend::Exact => {
            let r = rank(d).expect("rank is defined for exact scalars");
            r < d.rows().min(d.cols())
        }
        Backend::Float => d.is_empty(),
    };
    let witnesses = residual.worst_entries(WITNESS_CAP);
    DualityReport {
        backend: T::BACKEND,
        residual,
        pass,
        degenerate,
        worst,
        witnesses,
        skipped_rows: skip_rows.clone(),
        skipped_cols: skip_cols.clone(),
    }
}

fn check_dims<T: Scalar>(
    l: &SparseOp<T>,
    lhat: &SparseOp<T>,
    d: &SparseOp<T>,
) -> Result<(), DualityError> {
    if !l.is_square()
        || !lhat.is_square()
        || d.rows() != l.rows()
        || d.cols() != lhat.rows()
    {
        return Err(DualityError::DimensionMismatch {
            l: l.rows(),
            lhat: lhat.rows(),
            d_rows: d.rows(),
            d_cols: d.cols(),
        });
    }
    Ok(())
}

/// Verify `L D = D adjoint(L̂)`.
///
/// `tol` applies only to the float backend; exact scalars must produce
/// an identically zero residual.
pub fn check_duality<T: Scalar>(
    l: &SparseOp<T>,
    lhat: &SparseOp<T>,
    d: &SparseOp<T>,
    tol: f64,
) -> Result<DualityReport<T>, DualityError> {
    check_duality_masked(l, lhat, d, tol, &BTreeSet::new(), &BTreeSet::new())
}

/// [`check_duality`] restricted to interior rows and columns.
///
/// `skip_rows` are boundary rows of `L` (residual rows ignored);
/// `skip_cols` are boundary rows of `L̂`, which surface as residual
/// columns because `L̂` enters through its adjoint.
pub fn check_duality_masked<T: Scalar>(
    l: &SparseOp<T>,
    lhat: &SparseOp<T>,
    d: &SparseOp<T>,
    tol: f64,
    skip_rows: &BTreeSet<usize>,
    skip_cols: &BTreeSet<usize>,
) -> Result<DualityReport<T>, DualityError> {
    check_dims(l, lhat, d)?;
    let residual = l.matmul(d).sub(&d.matmul(&lhat.adjoint()));
    Ok(build_report(&residual, d, tol, skip_rows, skip_cols))
}

/// A nonnegative matrix whose rows each sum to exactly 1, or a waived
/// stand-in that skips validation.
#[derive(Clone, Debug)]
pub struct Kernel {
    op: SparseOp<Rat>,
    validated: bool,
}

impl Kernel {
    pub fn new(op: SparseOp<Rat>) -> Result<Self, DualityError> {
        let one = Rat::from_int(1);
        let mut sums = vec![Rat::zero(); op.rows()];
        for (r, c, v) in op.iter() {
            if v.is_negative() {
                return Err(DualityError::NegativeKernelEntry {
                    row: r,
                    col: c,
                    value: v.to_string(),
                });
            }
            sums[r] = &sums[r] + v;
        }
        for (r, sum) in sums.iter().enumerate() {
            if *sum != one {
                return Err(DualityError::KernelRowSum { row: r, sum: sum.to_string() });
            }
        }
        Ok(Kernel { op, validated: true })
    }

    /// Skip the probability-kernel validation. The intertwining check
    /// still runs; only the stochastic interpretation is waived.
    pub fn waived(op: SparseOp<Rat>) -> Self {
        Kernel { op, validated: false }
    }

    pub fn op(&self) -> &SparseOp<Rat> {
        &self.op
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }
}

/// Verify `L K = K L̂` (no adjoint on the intertwined side).
pub fn check_intertwining(
    l: &SparseOp<Rat>,
    lhat: &SparseOp<Rat>,
    k: &Kernel,
) -> Result<DualityReport<Rat>, DualityError> {
    check_dims(l, lhat, k.op())?;
    let residual = l.matmul(k.op()).sub(&k.op().matmul(lhat));
    Ok(build_report(&residual, k.op(), 0.0, &BTreeSet::new(), &BTreeSet::new()))
}

// ---------------------------------------------------------------------------
// q-duality and thinning
// ---------------------------------------------------------------------------

/// Parameter map sending a reaction-diffusion model to its q-dual.
///
/// With gamma = (a + c - d + q b) / (1 - q):
/// a' = a + 2q gamma, b' = b + gamma, c' = c - (1+q) gamma,
/// d' = d + gamma, e' = e - gamma. The result may contain negative
/// entries; building a generator from it is the caller's gate.
pub fn q_dual_params(p: &LsParams, q: &Rat) -> Result<LsParams, DualityError> {
    let one = Rat::from_int(1);
    let inv = (&one - q).try_inv().ok_or(DualityError::QIsOne)?;
    let gamma = &(&(&(&p.a + &p.c) - &p.d) + &(q * &p.b)) * &inv;
    Ok(LsParams {
        a: &p.a + &(&(&Rat::from_int(2) * q) * &gamma),
        b: &p.b + &gamma,
        c: &p.c - &(&(&one + q) * &gamma),
        d: &p.d + &gamma,
        e: &p.e - &gamma,
    })
}

/// `sites`-fold Kronecker power, site 0 slowest, matching the
/// lexicographic configuration order of binary spaces.
pub fn kron_power<T: Scalar>(m: &SparseOp<T>, sites: usize) -> SparseOp<T> {
    let mut acc = SparseOp::identity(1);
    for _ in 0..sites {
        acc = acc.kron(m);
    }
    acc
}

/// Single-site factor of the q-duality function: rows indexed by x,
/// columns by y, entry q^{x y}.
pub fn dq_site_matrix(q: &Rat) -> SparseOp<Rat> {
    let one = Rat::from_int(1);
    SparseOp::from_rows(&[vec![one.clone(), one.clone()], vec![one, q.clone()]])
}

/// Product duality function `D_q(x, y) = q^{sum_i x_i y_i}` on
/// `{0,1}^sites`.
pub fn dq_matrix(sites: usize, q: &Rat) -> SparseOp<Rat> {
    kron_power(&dq_site_matrix(q), sites)
}

/// Exact inverse of [`dq_matrix`], from the closed-form single-site
/// inverse `(1-q)^{-1} [[-q, 1], [1, -1]]`; requires q != 1.
pub fn dq_inverse(sites: usize, q: &Rat) -> Result<SparseOp<Rat>, DualityError> {
    let one = Rat::from_int(1);
    let inv = (&one - q).try_inv().ok_or(DualityError::QIsOne)?;
    let site = SparseOp::from_rows(&[
        vec![-q.clone(), one.clone()],
        vec![one.clone(), -one],
    ])
    .scale(&inv);
    Ok(kron_power(&site, sites))
}

/// Single-site thinning factor: a particle is kept with probability p.
pub fn thinning_site_matrix(p: &Rat) -> SparseOp<Rat> {
    let one = Rat::from_int(1);
    SparseOp::from_rows(&[vec![one.clone(), Rat::zero()], vec![&one - p, p.clone()]])
}

/// Product thinning kernel on `{0,1}^sites`; requires p in [0, 1].
pub fn thinning_kernel(sites: usize, p: &Rat) -> Result<Kernel, DualityError> {
    let one = Rat::from_int(1);
    if p.is_negative() || (&one - p).is_negative() {
        return Err(DualityError::ThinningOutOfRange(p.to_string()));
    }
    Kernel::new(kron_power(&thinning_site_matrix(p), sites))
}

/// Product indicator duality `D(x, y) = prod_i 1{x_i != y_i}`.
pub fn product_neq_matrix(sites: usize) -> SparseOp<Rat> {
    let one = Rat::from_int(1);
    let site =
        SparseOp::from_rows(&[vec![Rat::zero(), one.clone()], vec![one, Rat::zero()]]);
    kron_power(&site, sites)
}

/// Product indicator duality `D(x, y) = prod_i 1{x_i >= y_i}`.
pub fn product_geq_matrix(sites: usize) -> SparseOp<Rat> {
    let one = Rat::from_int(1);
    let site =
        SparseOp::from_rows(&[vec![one.clone(), Rat::zero()], vec![one.clone(), one]]);
    kron_power(&site, sites)
}

// ---------------------------------------------------------------------------
// Time reversal, invariant measures, commutant symmetries
// ---------------------------------------------------------------------------

/// Generator of the time-reversed chain and the diagonal duality
/// function it induces: `L~(x,y) = mu(y) L(y,x) / mu(x)` together with
/// `R = diag(1/mu)`, so that `L R = R adjoint(L~)`.
///
/// Requires mu strictly positive and exactly invariant (`mu L = 0`).
pub fn reversal(
    l: &SparseOp<Rat>,
    mu: &[Rat],
) -> Result<(SparseOp<Rat>, SparseOp<Rat>), DualityError> {
    assert!(l.is_square(), "reversal needs a square generator");
    assert_eq!(mu.len(), l.rows(), "measure length must match the state count");
    for (i, m) in mu.iter().enumerate() {
        if !m.is_positive() {
            return Err(DualityError::NonpositiveMeasure {
                index: i,
                value: m.to_string(),
            });
        }
    }
    let flow = l.left_apply(mu);
    for (i, v) in flow.iter().enumerate() {
        if !v.is_zero() {
            return Err(DualityError::NotInvariant { index: i, value: v.to_string() });
        }
    }
    let n = l.rows();
    let mut ltilde = SparseOp::zero(n, n);
    for (y, x, v) in l.iter() {
        let scaled = &(&mu[y] * v) * &mu[x].try_inv().expect("mu positive");
        ltilde.set(x, y, scaled);
    }
    let mut r = SparseOp::zero(n, n);
    for (x, m) in mu.iter().enumerate() {
        r.set(x, x, m.try_inv().expect("mu positive"));
    }
    Ok((ltilde, r))
}

/// Basis of left-null vectors `{mu : mu L = 0}` over an exact field.
pub fn invariant_measures<T: Scalar>(
    l: &SparseOp<T>,
) -> Result<Vec<Vec<T>>, LinopError> {
    null_space(&l.transpose())
}

/// Basis of the symmetry algebra `{S : S L = L S}`, solved exactly on
/// the vectorized system of dimension `n^2`.
pub fn commutant<T: Scalar>(
    l: &SparseOp<T>,
) -> Result<Vec<SparseOp<T>>, DualityError> {
    commutant_with_budget(l, COMMUTANT_DIM_BUDGET)
}

/// [`commutant`] with an explicit dimension budget.
pub fn commutant_with_budget<T: Scalar>(
    l: &SparseOp<T>,
    budget: usize,
) -> Result<Vec<SparseOp<T>>, DualityError> {
    assert!(l.is_square(), "commutant needs a square operator");
    let n = l.rows();
    if n > budget {
        return Err(DualityError::CommutantBudget { dim: n, budget });
    }
    // Unknown S vectorized as s[i*n + j]; equation (i,j) reads
    // sum_k S(i,k) L(k,j) - sum_k L(i,k) S(k,j) = 0.
    let mut system = SparseOp::<T>::zero(n * n, n * n);
    for (k, j, v) in l.iter() {
        for i in 0..n {
            system.add_to(i * n + j, i * n + k, v.clone());
        }
    }
    for (i, k, v) in l.iter() {
        for j in 0..n {
            system.add_to(i * n + j, k * n + j, -v.clone());
        }
    }
    let basis = null_space(&system)?;
    Ok(basis
        .into_iter()
        .map(|vec| {
            let mut s = SparseOp::zero(n, n);
            for (idx, v) in vec.into_iter().enumerate() {
                if !v.is_zero() {
                    s.set(idx / n, idx % n, v);
                }
            }
            s
        })
        .collect())
}

/// New self-duality from an old one: if `Q` is a self-duality function
/// for `L` and `S` commutes with `L`, then `S Q` is again one.
///
/// Both preconditions are checked; the returned report covers `S Q`.
pub fn symmetry_dualities<T: Scalar>(
    l: &SparseOp<T>,
    q: &SparseOp<T>,
    s: &SparseOp<T>,
    tol: f64,
) -> Result<DualityReport<T>, DualityError> {
    let comm = s.matmul(l).sub(&l.matmul(s));
    let comm_ok = match T::BACKEND {
        Backend::Exact => comm.is_empty(),
        Backend::Float => comm.max_magnitude() <= tol,
    };
    if !comm_ok {
        return Err(DualityError::NotASymmetry { worst: comm.max_magnitude() });
    }
    let base = check_duality(l, l, q, tol)?;
    if !base.pass {
        return Err(DualityError::BaseNotSelfDual { worst: base.worst });
    }
    check_duality(l, l, &s.matmul(q), tol)
}

// ---------------------------------------------------------------------------
// Pathwise map duality
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct MapDualityReport {
    pub pass: bool,
    pub checked: usize,
    /// State-index pairs (x, y) with `D(m(x), y) != D(x, m̂(y))`.
    pub witnesses: Vec<(usize, usize)>,
}

/// Exhaustively verify `D(m(x), y) = D(x, m̂(y))` over all state pairs.
pub fn check_map_duality(
    m: &[usize],
    mhat: &[usize],
    d: &SparseOp<Rat>,
) -> MapDualityReport {
    assert_eq!(m.len(), d.rows(), "map must cover the rows of D");
    assert_eq!(mhat.len(), d.cols(), "dual map must cover the columns of D");
    let mut witnesses = Vec::new();
    let mut checked = 0usize;
    for (x, &mx) in m.iter().enumerate() {
        for (y, &mhy) in mhat.iter().enumerate() {
            checked += 1;
            if d.get(mx, y) != d.get(x, mhy) && witnesses.len() < WITNESS_CAP {
                witnesses.push((x, y));
            }
        }
    }
    MapDualityReport { pass: witnesses.is_empty(), checked, witnesses }
}

// ---------------------------------------------------------------------------
// Inclusion process vs Brownian energy process
// ---------------------------------------------------------------------------

/// Report for dualities verified at the level of exact polynomials.
#[derive(Clone, Debug)]
pub struct PolyDualityReport {
    pub pass: bool,
    pub checked: usize,
    /// Configurations (or labels) where the two sides differ, with the
    /// mismatch rendered for the report.
    pub witnesses: Vec<(Vec<u32>, String)>,
}

/// Rising factorial `alpha (alpha+1) ... (alpha+x-1)`.
fn rising(alpha: &Rat, x: u32) -> Rat {
    let mut acc = Rat::from_int(1);
    for k in 0..x {
        acc = &acc * &(alpha + &Rat::from_int(k as i64));
    }
    acc
}

/// Product duality function between energies z and occupations x,
/// normalized per site so that `z Q(z, x) = (alpha + x) Q(z, x + 1)`:
/// `Q(z, x) = prod_i z_i^{x_i} / (alpha_i (alpha_i+1)...(alpha_i+x_i-1))`.
pub fn sip_bep_duality_poly(alphas: &[Rat], x: &[u32]) -> Poly<Rat> {
    assert_eq!(alphas.len(), x.len(), "one occupation per site");
    let mut coeff = Rat::from_int(1);
    for (alpha, &xi) in alphas.iter().zip(x) {
        coeff = &coeff
            * &rising(alpha, xi)
                .try_inv()
                .expect("rising factorial of a positive alpha is nonzero");
    }
    Poly::monomial(x.to_vec(), coeff)
}

/// Verify the inclusion-process / energy-diffusion duality exactly on
/// every configuration with total occupation at most `cap - 1`: the
/// diffusion generator applied to `Q(., x)` must equal the
/// occupation-side row sum `sum_x' L̂(x, x') Q(., x')` as a polynomial.
pub fn check_sip_bep_duality(
    graph: &SiteGraph,
    alphas: &[Rat],
    cap: u32,
) -> Result<PolyDualityReport, ModelError> {
    let sip = sip_generator(graph, alphas, cap)?;
    let bep: DiffOp<Rat> = bep_generator(graph, alphas);
    let mut witnesses = Vec::new();
    let mut checked = 0usize;
    for (row, x) in sip.space.configs().iter().enumerate() {
        if sip.space.total(row) + 1 > cap as u64 {
            continue;
        }
        checked += 1;
        let lhs = bep.apply(&sip_bep_duality_poly(alphas, x));
        let mut rhs = Poly::zero(graph.sites());
        for (col, v) in sip.op.row(row) {
            let q = sip_bep_duality_poly(alphas, sip.space.config(col));
            rhs = rhs.add(&q.scale(v));
        }
        let diff = lhs.sub(&rhs);
        if !diff.is_zero() && witnesses.len() < WITNESS_CAP {
            witnesses.push((x.clone(), format!("{diff:?}")));
        }
    }
    Ok(PolyDualityReport { pass: witnesses.is_empty(), checked, witnesses })
}

// ---------------------------------------------------------------------------
// Wright-Fisher dualities
// ---------------------------------------------------------------------------

/// Report for the three Wright-Fisher duality statements.
#[derive(Clone, Debug)]
pub struct WfDualityReport {
    pub pass: bool,
    /// Building blocks: multiplication by (1-x) and d/dx against their
    /// occupation-side counterparts f(n) -> f(n+1) and f(n) -> -n f(n-1).
    pub blocks_pass: bool,
    /// Row-wise moment duality against the truncated jump generator.
    pub rows_pass: bool,
    /// Exponential self-duality: the generator acting in x and in y on
    /// exp(-s x y) agree identically.
    pub selfdual_pass: bool,
    pub witnesses: Vec<String>,
}

/// The moment duality function `(1 - x)^n` as an exact polynomial.
pub fn wf_moment_poly(n: u32) -> Poly<Rat> {
    Poly::affine_power(1, 0, Rat::from_int(1), Rat::from_int(-1), n)
}

/// Verify the Wright-Fisher dualities up to moment degree `cap - 1`.
pub fn check_wf_dualities(s: &Rat, cap: u32) -> Result<WfDualityReport, DualityError> {
    if s.is_negative() {
        return Err(DualityError::NegativeSelection(s.to_string()));
    }
    assert!(cap >= 2, "need at least moments 0 and 1");
    let mut witnesses = Vec::new();

    // Blocks. The occupation-side images stay below n = cap, so every
    // degree n <= cap - 1 is checkable without truncation error.
    let one_minus_x = Poly::affine_power(1, 0, Rat::from_int(1), Rat::from_int(-1), 1);
    let am: DiffOp<Rat> = DiffOp::multiplication(one_minus_x);
    let ap: DiffOp<Rat> = DiffOp::derivative(1, 0);
    let mut blocks_pass = true;
    for n in 0..cap {
        let d_n = wf_moment_poly(n);
        let lower = am.apply(&d_n).sub(&wf_moment_poly(n + 1));
        let raise_rhs = if n == 0 {
            Poly::zero(1)
        } else {
            wf_moment_poly(n - 1).scale(&Rat::from_int(-(n as i64)))
        };
        let raise = ap.apply(&d_n).sub(&raise_rhs);
        if !lower.is_zero() || !raise.is_zero() {
            blocks_pass = false;
            if witnesses.len() < WITNESS_CAP {
                witnesses.push(format!(
                    "block mismatch at n={n}: lower {lower:?}, raise {raise:?}"
                ));
            }
        }
    }

    // Row-wise moment duality. Row cap of the truncated jump generator
    // dropped its upward jump, so rows n <= cap - 1 are the interior.
    let l: DiffOp<Rat> = wf_generator(s);
    let dual = crate::models::wf_moment_dual_operator(s, cap);
    let mut rows_pass = true;
    for n in 0..cap {
        let lhs = l.apply(&wf_moment_poly(n));
        let mut rhs = Poly::zero(1);
        let row = dual.space.index_of(&[n]).expect("n is in the space");
        for (col, v) in dual.op.row(row) {
            let m = dual.space.config(col)[0];
            rhs = rhs.add(&wf_moment_poly(m).scale(v));
        }
        let diff = lhs.sub(&rhs);
        if !diff.is_zero() {
            rows_pass = false;
            if witnesses.len() < WITNESS_CAP {
                witnesses.push(format!("moment row mismatch at n={n}: {diff:?}"));
            }
        }
    }

    // Exponential self-duality, as an identity of kernel elements.
    let in_x = wf_generator::<Rat>(s).embed(2, &[0]);
    let in_y = wf_generator::<Rat>(s).embed(2, &[1]);
    let kern = ExpKern::bare(s.clone());
    let selfdual = in_x.apply_kern(&kern).sub(&in_y.apply_kern(&kern));
    let selfdual_pass = selfdual.is_zero();
    if !selfdual_pass && witnesses.len() < WITNESS_CAP {
        witnesses.push(format!("self-duality residual {selfdual:?}"));
    }

    Ok(WfDualityReport {
        pass: blocks_pass && rows_pass && selfdual_pass,
        blocks_pass,
        rows_pass,
        selfdual_pass,
        witnesses,
    })
}

// ---------------------------------------------------------------------------
// Semigroup-level checks
// ---------------------------------------------------------------------------

/// Max-norm residual of `P_t D - D adjoint(P̂_t)`, with both semigroups
/// computed by uniformization to series accuracy `series_tol`.
pub fn semigroup_duality_residual(
    l: &SparseOp<f64>,
    lhat: &SparseOp<f64>,
    d: &SparseOp<f64>,
    t: f64,
    series_tol: f64,
) -> Result<f64, LinopError> {
    let p = uniformized_semigroup(l, t, series_tol)?;
    let phat = uniformized_semigroup(lhat, t, series_tol)?;
    Ok(p.matmul(d).sub(&d.matmul(&phat.adjoint())).max_magnitude())
}
