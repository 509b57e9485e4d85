//! Monte Carlo sampling for duality statements that exact algebra
//! cannot reach: jump chains by Gillespie's method and diffusions by
//! Euler-Maruyama, compared through the expectation identity
//! `E^x[D(X_t, y)] = E^y[D(x, Y_t)]`.
//!
//! Convention: a generator written `a(x) d^2/dx^2 + b(x) d/dx` has
//! noise standard deviation `sqrt(2 a(x))`, not `sqrt(a(x))`.
//!
//! Randomness comes from the counter-based ChaCha8 generator, one
//! stream per replicate, so every estimate is a pure function of
//! (seed, replicate count) regardless of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::exactnum::Rat;
use crate::models::{validate_generator, GeneratorBundle};
use crate::statespace::SiteGraph;

/// Seed perturbation for the y-side sampler, so that the two legs of a
/// duality comparison draw independent randomness from one plan seed.
pub const RHS_SEED_XOR: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("replicate count must be at least 1")]
    BadReplicates,
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("horizon must be nonnegative and finite, got {0}")]
    BadHorizon(f64),
    #[error("generator failed validation and cannot be sampled")]
    InvalidGenerator,
    #[error("initial state index {index} out of range for dimension {dim}")]
    BadStateIndex { index: usize, dim: usize },
    #[error("domain violation: {0}")]
    Domain(String),
}

/// Replicate budget and scheme parameters for one sampling run.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    pub replicates: u64,
    pub horizon: f64,
    pub seed: u64,
    /// Upper bound on the Euler-Maruyama step; the scheme uses the
    /// uniform step `horizon / ceil(horizon / step)`. Ignored by the
    /// exact jump-chain sampler.
    pub step: f64,
}

impl SamplePlan {
    pub fn new(replicates: u64, horizon: f64, seed: u64, step: f64) -> Result<Self, SimError> {
        if replicates == 0 {
            return Err(SimError::BadReplicates);
        }
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(SimError::BadHorizon(horizon));
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(SimError::BadStep(step));
        }
        Ok(SamplePlan { replicates, horizon, seed, step })
    }

    /// The same plan with the y-side seed, for the independent leg.
    pub fn rhs(&self) -> Self {
        SamplePlan { seed: self.seed ^ RHS_SEED_XOR, ..self.clone() }
    }
}

fn stream_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn euler_step_count(horizon: f64, step: f64) -> u64 {
    if horizon == 0.0 {
        0
    } else {
        (horizon / step).ceil() as u64
    }
}

// ---------------------------------------------------------------------------
// Jump chains
// ---------------------------------------------------------------------------

/// Exact sampler of the jump chain of a validated generator:
/// exponential holding times with rate `-L(x,x)` and jump law
/// `L(x,y) / -L(x,x)`.
#[derive(Clone, Debug)]
pub struct CtmcSampler {
    jumps: Vec<Vec<(usize, f64)>>,
    exits: Vec<f64>,
    x0: usize,
    horizon: f64,
    seed: u64,
}

/// Build the trajectory sampler for `bundle` started from state index
/// `x0`. The generator must pass [`validate_generator`].
pub fn gillespie(
    bundle: &GeneratorBundle,
    x0: usize,
    plan: &SamplePlan,
) -> Result<CtmcSampler, SimError> {
    if !validate_generator(&bundle.op).valid {
        return Err(SimError::InvalidGenerator);
    }
    let dim = bundle.space.dim();
    if x0 >= dim {
        return Err(SimError::BadStateIndex { index: x0, dim });
    }
    let mut jumps = vec![Vec::new(); dim];
    let mut exits = vec![0.0f64; dim];
    for (r, c, v) in bundle.op.iter() {
        if r != c {
            let rate = v.to_f64();
            jumps[r].push((c, rate));
            exits[r] += rate;
        }
    }
    Ok(CtmcSampler { jumps, exits, x0, horizon: plan.horizon, seed: plan.seed })
}

impl CtmcSampler {
    /// Jump times and post-jump states on `[0, horizon]`, starting
    /// with `(0, x0)`. Pure function of the replicate index.
    pub fn path(&self, replicate: u64) -> Vec<(f64, usize)> {
        let mut rng = stream_rng(self.seed, replicate);
        let mut out = vec![(0.0, self.x0)];
        let mut t = 0.0f64;
        let mut state = self.x0;
        loop {
            let exit = self.exits[state];
            if exit <= 0.0 {
                return out;
            }
            let e: f64 = rng.sample(Exp1);
            t += e / exit;
            if t > self.horizon {
                return out;
            }
            let mut u = rng.gen::<f64>() * exit;
            let row = &self.jumps[state];
            let mut next = row[row.len() - 1].0;
            for &(target, rate) in row {
                if u < rate {
                    next = target;
                    break;
                }
                u -= rate;
            }
            state = next;
            out.push((t, state));
        }
    }

    /// State at the horizon. Pure function of the replicate index.
    pub fn final_state(&self, replicate: u64) -> usize {
        self.path(replicate).last().expect("path starts at x0").1
    }
}

// ---------------------------------------------------------------------------
// Diffusions
// ---------------------------------------------------------------------------

/// Euler-Maruyama sampler of the selection diffusion on `[0, 1]` with
/// generator `x(1-x) d^2/dx^2 + s x(1-x) d/dx`: drift `s x(1-x)`,
/// noise standard deviation `sqrt(2 x(1-x))`, clamped to `[0, 1]`
/// after each step.
#[derive(Clone, Debug)]
pub struct WfSampler {
    s: f64,
    x0: f64,
    horizon: f64,
    steps: u64,
    seed: u64,
}

pub fn euler_maruyama_wf(s: &Rat, x0: f64, plan: &SamplePlan) -> Result<WfSampler, SimError> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(SimError::Domain(format!("x0 = {x0} lies outside [0, 1]")));
    }
    Ok(WfSampler {
        s: s.to_f64(),
        x0,
        horizon: plan.horizon,
        steps: euler_step_count(plan.horizon, plan.step),
        seed: plan.seed,
    })
}

impl WfSampler {
    /// State at the horizon. Pure function of the replicate index.
    pub fn final_value(&self, replicate: u64) -> f64 {
        let mut rng = stream_rng(self.seed, replicate);
        if self.steps == 0 {
            return self.x0;
        }
        let dt = self.horizon / self.steps as f64;
        let mut x = self.x0;
        for _ in 0..self.steps {
            let a = x * (1.0 - x);
            let z: f64 = rng.sample(StandardNormal);
            x += self.s * a * dt + (2.0 * a * dt).sqrt() * z;
            x = x.clamp(0.0, 1.0);
        }
        x
    }
}

/// Euler-Maruyama sampler of the energy diffusion: per edge {i, j}
/// with rate q, drift `q (alpha_j z_i - alpha_i z_j)` along
/// `e_j - e_i` and noise standard deviation `sqrt(2 q z_i z_j)` along
/// the same direction. Each pair transfer is truncated to what the
/// donor coordinate holds, so the state stays in `[0, inf)^n` and
/// every path conserves the total energy exactly.
#[derive(Clone, Debug)]
pub struct BepSampler {
    edges: Vec<(usize, usize, f64)>,
    alphas: Vec<f64>,
    z0: Vec<f64>,
    horizon: f64,
    steps: u64,
    seed: u64,
}

pub fn euler_maruyama_bep(
    graph: &SiteGraph,
    alphas: &[Rat],
    z0: &[f64],
    plan: &SamplePlan,
) -> Result<BepSampler, SimError> {
    if alphas.len() != graph.sites() || z0.len() != graph.sites() {
        return Err(SimError::Domain(format!(
            "graph has {} sites but got {} alphas and {} initial energies",
            graph.sites(),
            alphas.len(),
            z0.len()
        )));
    }
    for (i, alpha) in alphas.iter().enumerate() {
        if !alpha.is_positive() {
            return Err(SimError::Domain(format!("alpha[{i}] = {alpha} must be positive")));
        }
    }
    for (i, z) in z0.iter().enumerate() {
        if !z.is_finite() || *z < 0.0 {
            return Err(SimError::Domain(format!("z0[{i}] = {z} must be nonnegative")));
        }
    }
    let edges = graph
        .edges()
        .into_iter()
        .map(|(i, j, q)| (i, j, q.to_f64()))
        .collect();
    Ok(BepSampler {
        edges,
        alphas: alphas.iter().map(Rat::to_f64).collect(),
        z0: z0.to_vec(),
        horizon: plan.horizon,
        steps: euler_step_count(plan.horizon, plan.step),
        seed: plan.seed,
    })
}

impl BepSampler {
    /// Energy vector at the horizon. Pure function of the replicate.
    pub fn final_value(&self, replicate: u64) -> Vec<f64> {
        let mut rng = stream_rng(self.seed, replicate);
        let mut z = self.z0.clone();
        if self.steps == 0 {
            return z;
        }
        let dt = self.horizon / self.steps as f64;
        for _ in 0..self.steps {
            for &(i, j, q) in &self.edges {
                let drift = q * (self.alphas[j] * z[i] - self.alphas[i] * z[j]) * dt;
                let noise_sd = (2.0 * q * z[i] * z[j] * dt).max(0.0).sqrt();
                let w: f64 = rng.sample(StandardNormal);
                let inc = (drift + noise_sd * w).clamp(-z[j], z[i]);
                z[i] -= inc;
                z[j] += inc;
            }
        }
        z
    }
}

// ---------------------------------------------------------------------------
// Duality estimation
// ---------------------------------------------------------------------------

/// Two-sided Monte Carlo estimate of a duality identity at one grid
/// point.
#[derive(Clone, Debug)]
pub struct McDualityEstimate {
    pub lhs_mean: f64,
    pub lhs_se: f64,
    pub rhs_mean: f64,
    pub rhs_se: f64,
    /// `|lhs - rhs| / sqrt(se_l^2 + se_r^2)`; zero when both sides are
    /// deterministic and equal, infinite when deterministic and not.
    pub z: f64,
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean and standard error with pairwise summation in replicate order.
/// A constant sample short-circuits so its mean is bit-exact.
fn mean_se(values: &[f64]) -> (f64, f64) {
    if values.iter().all(|v| v.to_bits() == values[0].to_bits()) {
        return (values[0], 0.0);
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimate both sides of `E^x[D(X_t, y)] = E^y[D(x, Y_t)]`.
///
/// `lhs(r)` must return `D(X_t, y)` sampled under replicate `r` and
/// `rhs(r)` the independent `D(x, Y_t)`; build the y-side sampler with
/// [`SamplePlan::rhs`] so the legs do not share randomness. Replicates
/// evaluate in parallel; the estimate is independent of scheduling.
pub fn mc_duality<F, G>(replicates: u64, lhs: F, rhs: G) -> McDualityEstimate
where
    F: Fn(u64) -> f64 + Sync,
    G: Fn(u64) -> f64 + Sync,
{
    let lhs_vals: Vec<f64> = (0..replicates).into_par_iter().map(&lhs).collect();
    let rhs_vals: Vec<f64> = (0..replicates).into_par_iter().map(&rhs).collect();
    let (lhs_mean, lhs_se) = mean_se(&lhs_vals);
    let (rhs_mean, rhs_se) = mean_se(&rhs_vals);
    let denom = lhs_se.hypot(rhs_se);
    let diff = (lhs_mean - rhs_mean).abs();
    let z = if denom > 0.0 {
        diff / denom
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    McDualityEstimate { lhs_mean, lhs_se, rhs_mean, rhs_se, z }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::{uniformized_semigroup, SparseOp};
    use crate::models::{pathwise_generator, sep_generator, GeneratorBundle};
    use crate::statespace::ConfigSpace;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn rq(n: i64, d: i64) -> Rat {
        Rat::new(n, d).unwrap()
    }

    fn flip_chain() -> GeneratorBundle {
        let space = ConfigSpace::binary(1).unwrap();
        let maps = vec![(vec![1usize, 0], r(1))];
        pathwise_generator(&space, &maps)
    }

    #[test]
    fn plan_validation() {
        assert!(matches!(SamplePlan::new(0, 1.0, 7, 0.1), Err(SimError::BadReplicates)));
        assert!(matches!(SamplePlan::new(10, -1.0, 7, 0.1), Err(SimError::BadHorizon(_))));
        assert!(matches!(SamplePlan::new(10, 1.0, 7, 0.0), Err(SimError::BadStep(_))));
        let plan = SamplePlan::new(10, 1.0, 7, 0.1).unwrap();
        assert_eq!(plan.rhs().seed, 7 ^ RHS_SEED_XOR);
        assert_eq!(plan.rhs().replicates, 10);
    }

    #[test]
    fn zero_generator_gives_constant_trajectories() {
        let space = ConfigSpace::binary(2).unwrap();
        let bundle = pathwise_generator(&space, &[]);
        let plan = SamplePlan::new(5, 3.0, 1, 0.1).unwrap();
        let sampler = gillespie(&bundle, 2, &plan).unwrap();
        for rep in 0..5 {
            assert_eq!(sampler.path(rep), vec![(0.0, 2)]);
            assert_eq!(sampler.final_state(rep), 2);
        }
    }

    #[test]
    fn gillespie_rejects_bad_input() {
        let space = ConfigSpace::binary(1).unwrap();
        let mut bundle = pathwise_generator(&space, &[]);
        let plan = SamplePlan::new(5, 1.0, 1, 0.1).unwrap();
        assert!(matches!(
            gillespie(&bundle, 9, &plan),
            Err(SimError::BadStateIndex { index: 9, dim: 2 })
        ));
        bundle.op.set(0, 1, r(-1));
        assert!(matches!(gillespie(&bundle, 0, &plan), Err(SimError::InvalidGenerator)));
    }

    #[test]
    fn flip_chain_occupation_approaches_half() {
        // Stationary law of the symmetric flip chain is uniform; at
        // t = 8 the spectral gap 2 makes the bias ~ e^{-16}.
        let plan = SamplePlan::new(4000, 8.0, 42, 0.1).unwrap();
        let sampler = gillespie(&flip_chain(), 0, &plan).unwrap();
        let vals: Vec<f64> = (0..plan.replicates)
            .map(|rep| sampler.final_state(rep) as f64)
            .collect();
        let (mean, se) = mean_se(&vals);
        assert!((mean - 0.5).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sep_conserves_particles_pathwise() {
        let g = SiteGraph::complete(3);
        let bundle = sep_generator(&g);
        let x0 = bundle.space.index_of(&[1, 0, 1]).unwrap();
        let plan = SamplePlan::new(50, 2.0, 9, 0.1).unwrap();
        let sampler = gillespie(&bundle, x0, &plan).unwrap();
        for rep in 0..50 {
            for (_, state) in sampler.path(rep) {
                assert_eq!(bundle.space.total(state), 2);
            }
        }
    }

    #[test]
    fn wf_absorbing_boundaries_are_fixed() {
        let plan = SamplePlan::new(3, 1.0, 5, 1e-3).unwrap();
        for x0 in [0.0, 1.0] {
            let sampler = euler_maruyama_wf(&r(1), x0, &plan).unwrap();
            for rep in 0..3 {
                assert_eq!(sampler.final_value(rep), x0);
            }
        }
        assert!(matches!(
            euler_maruyama_wf(&r(1), 1.5, &plan),
            Err(SimError::Domain(_))
        ));
    }

    #[test]
    fn bep_total_energy_drift_vanishes_in_law() {
        let g = SiteGraph::complete(2);
        let plan = SamplePlan::new(2000, 0.5, 11, 1e-3).unwrap();
        let sampler = euler_maruyama_bep(&g, &[r(1), r(1)], &[1.0, 2.0], &plan).unwrap();
        let drifts: Vec<f64> = (0..plan.replicates)
            .map(|rep| {
                let z = sampler.final_value(rep);
                // The truncated scheme conserves the total pathwise up
                // to float rounding.
                assert!((z[0] + z[1] - 3.0).abs() <= 1e-12, "z = {z:?}");
                (z[0] + z[1] - 3.0) / plan.horizon
            })
            .collect();
        let (mean, se) = mean_se(&drifts);
        assert!(mean.abs() <= 3.0 * se.max(1e-12), "mean {mean}, se {se}");
    }

    #[test]
    fn bep_rejects_bad_domains() {
        let g = SiteGraph::complete(2);
        let plan = SamplePlan::new(2, 0.5, 11, 1e-2).unwrap();
        assert!(matches!(
            euler_maruyama_bep(&g, &[r(1)], &[1.0, 1.0], &plan),
            Err(SimError::Domain(_))
        ));
        assert!(matches!(
            euler_maruyama_bep(&g, &[r(1), r(0)], &[1.0, 1.0], &plan),
            Err(SimError::Domain(_))
        ));
        assert!(matches!(
            euler_maruyama_bep(&g, &[r(1), r(1)], &[1.0, -1.0], &plan),
            Err(SimError::Domain(_))
        ));
    }

    #[test]
    fn zero_horizon_gives_exact_zero_z() {
        let plan = SamplePlan::new(100, 0.0, 3, 1e-3).unwrap();
        let x = euler_maruyama_wf(&r(1), 0.3, &plan).unwrap();
        let y = euler_maruyama_wf(&r(1), 0.7, &plan).unwrap();
        let s = 1.0f64;
        let est = mc_duality(
            plan.replicates,
            |rep| (-s * x.final_value(rep) * 0.7).exp(),
            |rep| (-s * 0.3 * y.final_value(rep)).exp(),
        );
        assert_eq!(est.z, 0.0);
        assert_eq!(est.lhs_mean, est.rhs_mean);
        assert_eq!(est.lhs_se, 0.0);
    }

    #[test]
    fn estimates_are_bit_exact_deterministic() {
        let plan = SamplePlan::new(500, 0.2, 77, 1e-2).unwrap();
        let runs: Vec<McDualityEstimate> = (0..2)
            .map(|_| {
                let x = euler_maruyama_wf(&r(1), 0.5, &plan).unwrap();
                let y = euler_maruyama_wf(&r(1), 0.5, &plan.rhs()).unwrap();
                mc_duality(
                    plan.replicates,
                    |rep| (-x.final_value(rep) * 0.5f64).exp(),
                    |rep| (-0.5f64 * y.final_value(rep)).exp(),
                )
            })
            .collect();
        assert_eq!(runs[0].lhs_mean.to_bits(), runs[1].lhs_mean.to_bits());
        assert_eq!(runs[0].rhs_mean.to_bits(), runs[1].rhs_mean.to_bits());
        assert_eq!(runs[0].z.to_bits(), runs[1].z.to_bits());
        let sampler = gillespie(&flip_chain(), 0, &plan).unwrap();
        assert_eq!(sampler.path(13), sampler.path(13));
    }

    #[test]
    fn mc_matches_uniformized_semigroup_on_four_states() {
        // Cyclic-with-shortcut chain on four states; occupation of
        // state 2 at t = 0.7 against the exact semigroup row.
        let l = SparseOp::from_rows(&[
            vec![r(-3), r(2), r(1), r(0)],
            vec![r(0), r(-1), r(1), r(0)],
            vec![r(1), r(0), r(-2), r(1)],
            vec![rq(1, 2), r(0), r(0), rq(-1, 2)],
        ]);
        let space = ConfigSpace::capped(1, 3).unwrap();
        let bundle = GeneratorBundle {
            space,
            op: l.clone(),
            label: "four-state test chain".to_string(),
            boundary_rows: Default::default(),
        };
        let plan = SamplePlan::new(20000, 0.7, 123, 0.1).unwrap();
        let sampler = gillespie(&bundle, 0, &plan).unwrap();
        let vals: Vec<f64> = (0..plan.replicates)
            .into_par_iter()
            .map(|rep| if sampler.final_state(rep) == 2 { 1.0 } else { 0.0 })
            .collect();
        let (mean, se) = mean_se(&vals);
        let p = uniformized_semigroup(&l.to_float(), 0.7, 1e-13).unwrap();
        let exact = p.get(0, 2);
        assert!((mean - exact).abs() <= 4.0 * se, "mean {mean}, exact {exact}, se {se}");
    }

    #[test]
    fn wf_self_duality_z_scores_stay_small_under_step_halving() {
        // One grid point of the exponential self-duality; halving the
        // step must keep the pre-registered z <= 4 gate passing.
        let s = r(1);
        let (x0, y0, t) = (0.5f64, 0.5f64, 0.1f64);
        for step in [1e-3, 5e-4] {
            let plan = SamplePlan::new(20000, t, 2024, step).unwrap();
            let x = euler_maruyama_wf(&s, x0, &plan).unwrap();
            let y = euler_maruyama_wf(&s, y0, &plan.rhs()).unwrap();
            let sf = s.to_f64();
            let est = mc_duality(
                plan.replicates,
                |rep| (-sf * x.final_value(rep) * y0).exp(),
                |rep| (-sf * x0 * y.final_value(rep)).exp(),
            );
            assert!(est.z <= 4.0, "step {step}: z = {}", est.z);
        }
    }
}
