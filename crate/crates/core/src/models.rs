//! Builders for concrete Markov generators on finite configuration
//! spaces, plus generator validation.
//!
//! Every builder returns a [`GeneratorBundle`]: the state space, the
//! exact sparse operator, a provenance label, and the set of boundary
//! rows on which a truncated state space forced a jump to be dropped.
//! Dropped jumps contribute neither an off-diagonal entry nor a
//! diagonal compensation, so every row still sums to zero; identities
//! involving truncated generators are only asserted on interior rows.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::exactnum::Rat;
use crate::liealg::{lift_site_op, su11_local, su2_local};
use crate::linop::SparseOp;
use crate::statespace::{Config, ConfigSpace, SiteGraph, SpaceError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("rate `{param}` must be nonnegative, got {value}")]
    NegativeRate { param: &'static str, value: String },
    #[error("alpha[{site}] must be positive, got {value}")]
    NonpositiveAlpha { site: usize, value: String },
}

/// Reaction-diffusion rates: annihilation, branching, coalescence,
/// death, exclusion. Construction of a Markov generator requires all
/// five nonnegative; signed values arise as images of the q-dual
/// parameter map and are valid operator coefficients, not rates.
#[derive(Clone, Debug, PartialEq)]
pub struct LsParams {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
    pub e: Rat,
}

impl LsParams {
    pub fn new(a: Rat, b: Rat, c: Rat, d: Rat, e: Rat) -> Self {
        LsParams { a, b, c, d, e }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64, e: i64) -> Self {
        let r = Rat::from_int;
        LsParams::new(r(a), r(b), r(c), r(d), r(e))
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.a.is_negative()
            && !self.b.is_negative()
            && !self.c.is_negative()
            && !self.d.is_negative()
            && !self.e.is_negative()
    }

    fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
            ("e", &self.e),
        ] {
            if v.is_negative() {
                return Err(ModelError::NegativeRate { param: name, value: v.to_string() });
            }
        }
        Ok(())
    }
}

/// A generator together with the space it acts on.
#[derive(Clone, Debug)]
pub struct GeneratorBundle {
    pub space: ConfigSpace,
    pub op: SparseOp<Rat>,
    pub label: String,
    /// Rows where a jump left the truncated space and was dropped.
    pub boundary_rows: BTreeSet<usize>,
}

impl GeneratorBundle {
    pub fn is_interior(&self, row: usize) -> bool {
        !self.boundary_rows.contains(&row)
    }

    pub fn validate(&self) -> GeneratorReport {
        validate_generator(&self.op)
    }
}

/// Accumulates jump rates into an exact generator matrix, balancing the
/// diagonal and tracking rows whose jumps left the space.
struct RateAcc<'a> {
    space: &'a ConfigSpace,
    op: SparseOp<Rat>,
    boundary: BTreeSet<usize>,
}

impl<'a> RateAcc<'a> {
    fn new(space: &'a ConfigSpace) -> Self {
        let dim = space.dim();
        RateAcc { space, op: SparseOp::zero(dim, dim), boundary: BTreeSet::new() }
    }

    fn add_jump(&mut self, from: usize, target: &Config, rate: Rat) {
        if rate.is_zero() {
            return;
        }
        match self.space.index_of(target) {
            Some(to) if to != from => {
                self.op.add_to(from, to, rate.clone());
                self.op.add_to(from, from, -rate);
            }
            Some(_) => {}
            None => {
                self.boundary.insert(from);
            }
        }
    }

    fn into_parts(self) -> (SparseOp<Rat>, BTreeSet<usize>) {
        (self.op, self.boundary)
    }
}

/// Maximum number of violations listed per category.
pub const WITNESS_CAP: usize = 10;

/// Validity report for a candidate generator: off-diagonal entries must
/// be nonnegative and every row must sum to zero.
#[derive(Clone, Debug)]
pub struct GeneratorReport {
    pub valid: bool,
    /// Negative off-diagonal entries, capped at [`WITNESS_CAP`].
    pub negative_entries: Vec<(usize, usize, Rat)>,
    /// Rows with nonzero sum, capped at [`WITNESS_CAP`].
    pub bad_rows: Vec<(usize, Rat)>,
    /// True when either list was truncated.
    pub truncated: bool,
}

pub fn validate_generator(op: &SparseOp<Rat>) -> GeneratorReport {
    assert!(op.is_square(), "generator must be square");
    let mut negative_entries = Vec::new();
    let mut bad_rows = Vec::new();
    let mut truncated = false;
    let mut row_sums = vec![Rat::zero(); op.rows()];
    for (r, c, v) in op.iter() {
        row_sums[r] = &row_sums[r] + v;
        if r != c && v.is_negative() {
            if negative_entries.len() < WITNESS_CAP {
                negative_entries.push((r, c, v.clone()));
            } else {
                truncated = true;
            }
        }
    }
    for (r, sum) in row_sums.into_iter().enumerate() {
        if !sum.is_zero() {
            if bad_rows.len() < WITNESS_CAP {
                bad_rows.push((r, sum));
            } else {
                truncated = true;
            }
        }
    }
    GeneratorReport {
        valid: negative_entries.is_empty() && bad_rows.is_empty() && !truncated,
        negative_entries,
        bad_rows,
        truncated,
    }
}

// ---------------------------------------------------------------------------
// Reaction-diffusion family
// ---------------------------------------------------------------------------

/// Matrix realization of the five-parameter reaction-diffusion
/// generator, without sign checks. Per ordered pair (i, j) with rate
/// q(i, j):
/// annihilation a/2 on 11 -> 00, branching b on 01 -> 11,
/// coalescence c on 11 -> 01, death d on 01 -> 00,
/// exclusion e on 01 -> 10 (first slot is site i).
pub fn lloyd_sudbury_operator(params: &LsParams, graph: &SiteGraph) -> GeneratorBundle {
    let space = ConfigSpace::binary(graph.sites()).expect("binary space");
    let half = Rat::new(1, 2).unwrap();
    let mut acc = RateAcc::new(&space);
    for (row, x) in space.configs().iter().enumerate() {
        for (i, j, q) in graph.ordered_pairs() {
            let (xi, xj) = (x[i], x[j]);
            if (xi, xj) == (1, 1) {
                if !params.a.is_zero() {
                    let mut t = x.clone();
                    t[i] = 0;
                    t[j] = 0;
                    acc.add_jump(row, &t, &(&half * &params.a) * q);
                }
                if !params.c.is_zero() {
                    let mut t = x.clone();
                    t[i] = 0;
                    acc.add_jump(row, &t, &params.c * q);
                }
            }
            if (xi, xj) == (0, 1) {
                if !params.b.is_zero() {
                    let mut t = x.clone();
                    t[i] = 1;
                    acc.add_jump(row, &t, &params.b * q);
                }
                if !params.d.is_zero() {
                    let mut t = x.clone();
                    t[j] = 0;
                    acc.add_jump(row, &t, &params.d * q);
                }
                if !params.e.is_zero() {
                    let mut t = x.clone();
                    t[i] = 1;
                    t[j] = 0;
                    acc.add_jump(row, &t, &params.e * q);
                }
            }
        }
    }
    let label = format!(
        "lloyd-sudbury(a={},b={},c={},d={},e={})",
        params.a, params.b, params.c, params.d, params.e
    );
    let (op, boundary_rows) = acc.into_parts();
    GeneratorBundle { space, op, label, boundary_rows }
}

/// Checked variant: rejects negative rates.
pub fn lloyd_sudbury(params: &LsParams, graph: &SiteGraph) -> Result<GeneratorBundle, ModelError> {
    params.validate()?;
    Ok(lloyd_sudbury_operator(params, graph))
}

/// Voter model: b = d = 1.
pub fn voter(graph: &SiteGraph) -> GeneratorBundle {
    let mut bundle =
        lloyd_sudbury(&LsParams::from_ints(0, 1, 0, 1, 0), graph).expect("voter rates");
    bundle.label = "voter".to_string();
    bundle
}

/// Contact process: b = lambda, c = d = 1.
pub fn contact_process(graph: &SiteGraph, lambda: &Rat) -> Result<GeneratorBundle, ModelError> {
    let one = Rat::from_int(1);
    let params =
        LsParams::new(Rat::zero(), lambda.clone(), one.clone(), one, Rat::zero());
    let mut bundle = lloyd_sudbury(&params, graph)?;
    bundle.label = format!("contact({lambda})");
    Ok(bundle)
}

/// Biased voter model: b = 1 + s, d = 1.
pub fn biased_voter(s: &Rat, graph: &SiteGraph) -> Result<GeneratorBundle, ModelError> {
    let params = LsParams::new(
        Rat::zero(),
        &Rat::from_int(1) + s,
        Rat::zero(),
        Rat::from_int(1),
        Rat::zero(),
    );
    if s.is_negative() {
        return Err(ModelError::NegativeRate { param: "s", value: s.to_string() });
    }
    let mut bundle = lloyd_sudbury(&params, graph)?;
    bundle.label = format!("bias({s})");
    Ok(bundle)
}

/// Branching-coalescing random walk: b = s, c = 1, e = 1.
pub fn braco(s: &Rat, graph: &SiteGraph) -> Result<GeneratorBundle, ModelError> {
    if s.is_negative() {
        return Err(ModelError::NegativeRate { param: "s", value: s.to_string() });
    }
    let params = LsParams::new(
        Rat::zero(),
        s.clone(),
        Rat::from_int(1),
        Rat::zero(),
        Rat::from_int(1),
    );
    let mut bundle = lloyd_sudbury(&params, graph)?;
    bundle.label = format!("braco({s})");
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// Exclusion process
// ---------------------------------------------------------------------------

/// Symmetric exclusion process, built directly from its jump rates: per
/// ordered pair (i, j), a particle at i hops to an empty j at rate
/// q(i, j).
pub fn sep_generator(graph: &SiteGraph) -> GeneratorBundle {
    let space = ConfigSpace::binary(graph.sites()).expect("binary space");
    let mut acc = RateAcc::new(&space);
    for (row, x) in space.configs().iter().enumerate() {
        for (i, j, q) in graph.ordered_pairs() {
            if (x[i], x[j]) == (1, 0) {
                let mut t = x.clone();
                t[i] = 0;
                t[j] = 1;
                acc.add_jump(row, &t, q.clone());
            }
        }
    }
    let (op, boundary_rows) = acc.into_parts();
    GeneratorBundle { space, op, label: "sep".to_string(), boundary_rows }
}

/// Exclusion generator assembled from lifted ladder blocks:
/// `sum_{i<j} q(i,j) [J-_i J+_j + J-_j J+_i + 2 J0_i J0_j - I/2]`.
pub fn sep_from_blocks(graph: &SiteGraph) -> GeneratorBundle {
    let n = graph.sites();
    let space = ConfigSpace::binary(n).expect("binary space");
    let dims = vec![2usize; n];
    let (jm, jp, j0) = su2_local();
    let lift = |m: &SparseOp<Rat>, i: usize| lift_site_op(m, i, &dims);
    let dim = space.dim();
    let mut op = SparseOp::zero(dim, dim);
    let half = Rat::new(1, 2).unwrap();
    for (i, j, q) in graph.edges() {
        let mut pair = lift(&jm, i).matmul(&lift(&jp, j));
        pair = pair.add(&lift(&jm, j).matmul(&lift(&jp, i)));
        pair = pair.add(&lift(&j0, i).matmul(&lift(&j0, j)).scale(&Rat::from_int(2)));
        pair = pair.sub(&SparseOp::identity(dim).scale(&half));
        op = op.add(&pair.scale(q));
    }
    GeneratorBundle { space, op, label: "sep-blocks".to_string(), boundary_rows: BTreeSet::new() }
}

// ---------------------------------------------------------------------------
// Inclusion process
// ---------------------------------------------------------------------------

fn check_alphas(alphas: &[Rat], sites: usize) -> Result<(), ModelError> {
    assert_eq!(alphas.len(), sites, "one alpha per site");
    for (site, alpha) in alphas.iter().enumerate() {
        if !alpha.is_positive() {
            return Err(ModelError::NonpositiveAlpha { site, value: alpha.to_string() });
        }
    }
    Ok(())
}

/// Symmetric inclusion process on per-site occupations 0..=cap: per
/// ordered pair (i, j), a particle hops from i to j at rate
/// `q(i,j) (alpha_j x_i + x_i x_j)`. Jumps past the cap are dropped and
/// the row is marked as boundary; rows with total at most cap - 1 are
/// never boundary rows.
pub fn sip_generator(
    graph: &SiteGraph,
    alphas: &[Rat],
    cap: u32,
) -> Result<GeneratorBundle, ModelError> {
    check_alphas(alphas, graph.sites())?;
    let space = ConfigSpace::capped(graph.sites(), cap)?;
    let mut acc = RateAcc::new(&space);
    for (row, x) in space.configs().iter().enumerate() {
        for (i, j, q) in graph.ordered_pairs() {
            if x[i] == 0 {
                continue;
            }
            let xi = Rat::from_int(x[i] as i64);
            let xj = Rat::from_int(x[j] as i64);
            let rate = q * &(&(&alphas[j] * &xi) + &(&xi * &xj));
            let mut t = x.clone();
            t[i] -= 1;
            t[j] += 1;
            acc.add_jump(row, &t, rate);
        }
    }
    let (op, boundary_rows) = acc.into_parts();
    Ok(GeneratorBundle { space, op, label: format!("sip(cap={cap})"), boundary_rows })
}

/// Inclusion generator assembled from lifted conjugate ladder blocks:
/// `1/2 sum_{i,j} q(i,j) [K-_j K+_i + K+_j K-_i - 2 K0_j K0_i
///  + alpha_j alpha_i / 2]`. Exact on rows with every occupation below
/// `cap`; rows touching the cap are marked as boundary.
pub fn sip_from_blocks(
    graph: &SiteGraph,
    alphas: &[Rat],
    cap: u32,
) -> Result<GeneratorBundle, ModelError> {
    check_alphas(alphas, graph.sites())?;
    let n = graph.sites();
    let space = ConfigSpace::capped(n, cap)?;
    let local_dim = cap as usize + 1;
    let dims = vec![local_dim; n];
    let dim = space.dim();
    let half = Rat::new(1, 2).unwrap();
    let mut op = SparseOp::zero(dim, dim);
    for (i, j, q) in graph.ordered_pairs() {
        let (km_i, kp_i, k0_i) = su11_local(&alphas[i], local_dim);
        let (km_j, kp_j, k0_j) = su11_local(&alphas[j], local_dim);
        let lift = |m: &SparseOp<Rat>, s: usize| lift_site_op(m, s, &dims);
        let mut pair = lift(&km_j, j).matmul(&lift(&kp_i, i));
        pair = pair.add(&lift(&kp_j, j).matmul(&lift(&km_i, i)));
        pair = pair.sub(&lift(&k0_j, j).matmul(&lift(&k0_i, i)).scale(&Rat::from_int(2)));
        let scalar = &(&alphas[j] * &alphas[i]) * &half;
        pair = pair.add(&SparseOp::identity(dim).scale(&scalar));
        op = op.add(&pair.scale(&(&half * q)));
    }
    let mut boundary = BTreeSet::new();
    for (row, x) in space.configs().iter().enumerate() {
        if x.iter().any(|&v| v == cap) {
            boundary.insert(row);
        }
    }
    Ok(GeneratorBundle {
        space,
        op,
        label: format!("sip-blocks(cap={cap})"),
        boundary_rows: boundary,
    })
}

// ---------------------------------------------------------------------------
// Moment dual of the Wright-Fisher diffusion
// ---------------------------------------------------------------------------

/// Truncated moment-dual operator on n = 0..=cap, without sign checks:
/// n -> n-1 at rate n(n-1) and n -> n+1 at rate s n. The upward jump at
/// n = cap is dropped and that row marked as boundary.
pub fn wf_moment_dual_operator(s: &Rat, cap: u32) -> GeneratorBundle {
    let space = ConfigSpace::capped(1, cap).expect("single-site space");
    let mut acc = RateAcc::new(&space);
    for (row, x) in space.configs().iter().enumerate() {
        let n = x[0];
        let nr = Rat::from_int(n as i64);
        if n >= 2 {
            acc.add_jump(row, &vec![n - 1], &nr * &(&nr - &Rat::from_int(1)));
        }
        if n >= 1 {
            acc.add_jump(row, &vec![n + 1], s * &nr);
        }
    }
    let (op, boundary_rows) = acc.into_parts();
    GeneratorBundle { space, op, label: format!("wf-moment(s={s},cap={cap})"), boundary_rows }
}

/// Checked variant: a Markov generator only for s >= 0.
pub fn wf_moment_dual(s: &Rat, cap: u32) -> Result<GeneratorBundle, ModelError> {
    if s.is_negative() {
        return Err(ModelError::NegativeRate { param: "s", value: s.to_string() });
    }
    Ok(wf_moment_dual_operator(s, cap))
}

// ---------------------------------------------------------------------------
// Random-map generators
// ---------------------------------------------------------------------------

/// A deterministic self-map of a configuration space, stored as the
/// image index of every state.
pub type StateMap = Vec<usize>;

/// Generator of a random-mapping dynamics: each map `m` is applied at
/// its rate, so `L(x, y) = sum {r_m : m(x) = y, y != x}`.
pub fn pathwise_generator(space: &ConfigSpace, maps: &[(StateMap, Rat)]) -> GeneratorBundle {
    let dim = space.dim();
    let mut op = SparseOp::zero(dim, dim);
    for (map, rate) in maps {
        assert_eq!(map.len(), dim, "map must cover the space");
        assert!(!rate.is_negative(), "map rates must be nonnegative");
        for (x, &y) in map.iter().enumerate() {
            assert!(y < dim, "map image out of range");
            if y != x {
                op.add_to(x, y, rate.clone());
                op.add_to(x, x, -rate.clone());
            }
        }
    }
    GeneratorBundle {
        space: space.clone(),
        op,
        label: "pathwise".to_string(),
        boundary_rows: BTreeSet::new(),
    }
}

/// The map `x -> x with x[j] := x[i]` as a [`StateMap`].
pub fn copy_map(space: &ConfigSpace, i: usize, j: usize) -> StateMap {
    space
        .configs()
        .iter()
        .map(|x| {
            let mut t = x.clone();
            t[j] = t[i];
            space.index_of(&t).expect("copy map stays inside the space")
        })
        .collect()
}

/// The map `y -> y with y[i] := max(y[i], y[j]), y[j] := 0` as a
/// [`StateMap`]: on binary spaces, the walker at j coalesces into i.
pub fn coalesce_map(space: &ConfigSpace, i: usize, j: usize) -> StateMap {
    space
        .configs()
        .iter()
        .map(|y| {
            let mut t = y.clone();
            t[i] = t[i].max(t[j]);
            t[j] = 0;
            space.index_of(&t).expect("coalesce map stays inside the space")
        })
        .collect()
}
