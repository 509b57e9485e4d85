//! Finite configuration spaces and site graphs.
//!
//! A configuration assigns an occupation number to each site; the space is
//! the product of per-site ranges `0..card`, optionally restricted to a
//! sector of fixed total occupation. Enumeration order is lexicographic and
//! is the basis ordering every operator in this crate uses, so index 0 is
//! the all-zero configuration and the last site varies fastest.
//!
//! Spaces are materialized eagerly; a budget guards against accidental
//! exponential blowups before any allocation happens.

use std::collections::HashMap;

use thiserror::Error;

use num_traits::Zero;

use crate::exactnum::Rat;

/// Occupation numbers, one per site.
pub type Config = Vec<u32>;

/// Hard default ceiling on enumerated states.
pub const DEFAULT_STATE_BUDGET: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("state space of size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: usize },
    #[error("sector with total {total} is empty for this space")]
    EmptySector { total: u64 },
    #[error("a configuration space needs at least one site")]
    NoSites,
    #[error("site cardinality must be at least 1")]
    ZeroCardinality,
    #[error("graph edge ({i},{j}) is invalid: {reason}")]
    BadEdge { i: usize, j: usize, reason: String },
}

/// Finite product space of per-site occupations, optionally sector-restricted.
#[derive(Clone, Debug)]
pub struct ConfigSpace {
    cards: Vec<u32>,
    sector: Option<u64>,
    configs: Vec<Config>,
    index: HashMap<Config, usize>,
}

impl ConfigSpace {
    /// Full product space with the given per-site cardinalities.
    pub fn product(cards: &[u32]) -> Result<Self, SpaceError> {
        Self::product_with_budget(cards, DEFAULT_STATE_BUDGET)
    }

    pub fn product_with_budget(cards: &[u32], budget: usize) -> Result<Self, SpaceError> {
        if cards.is_empty() {
            return Err(SpaceError::NoSites);
        }
        if cards.iter().any(|&c| c == 0) {
            return Err(SpaceError::ZeroCardinality);
        }
        let mut size: u128 = 1;
        for &c in cards {
            size = size.saturating_mul(c as u128);
            if size > budget as u128 {
                return Err(SpaceError::BudgetExceeded { size, budget });
            }
        }
        let mut configs = Vec::with_capacity(size as usize);
        let mut cur = vec![0u32; cards.len()];
        loop {
            configs.push(cur.clone());
            // Lexicographic successor: bump the last site, carrying left.
            let mut pos = cards.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                cur[pos] += 1;
                if cur[pos] < cards[pos] {
                    break;
                }
                cur[pos] = 0;
                if pos == 0 {
                    let index = build_index(&configs);
                    return Ok(ConfigSpace { cards: cards.to_vec(), sector: None, configs, index });
                }
            }
        }
    }

    /// `{0,1}` at every site.
    pub fn binary(sites: usize) -> Result<Self, SpaceError> {
        Self::product(&vec![2; sites])
    }

    /// Occupations `0..=cap` at every site.
    pub fn capped(sites: usize, cap: u32) -> Result<Self, SpaceError> {
        Self::product(&vec![cap + 1; sites])
    }

    /// Restriction to configurations with total occupation `total`,
    /// preserving lexicographic order.
    pub fn sector(&self, total: u64) -> Result<Self, SpaceError> {
        let configs: Vec<Config> = self
            .configs
            .iter()
            .filter(|c| config_total(c) == total)
            .cloned()
            .collect();
        if configs.is_empty() {
            return Err(SpaceError::EmptySector { total });
        }
        let index = build_index(&configs);
        Ok(ConfigSpace { cards: self.cards.clone(), sector: Some(total), configs, index })
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn sites(&self) -> usize {
        self.cards.len()
    }

    pub fn cards(&self) -> &[u32] {
        &self.cards
    }

    pub fn is_binary(&self) -> bool {
        self.cards.iter().all(|&c| c == 2)
    }

    pub fn sector_total(&self) -> Option<u64> {
        self.sector
    }

    pub fn config(&self, i: usize) -> &[u32] {
        &self.configs[i]
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn index_of(&self, cfg: &[u32]) -> Option<usize> {
        self.index.get(cfg).copied()
    }

    /// Total occupation of configuration `i`.
    pub fn total(&self, i: usize) -> u64 {
        config_total(&self.configs[i])
    }
}

fn config_total(c: &[u32]) -> u64 {
    c.iter().map(|&x| x as u64).sum()
}

fn build_index(configs: &[Config]) -> HashMap<Config, usize> {
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect()
}

/// Symmetric nonnegative rate table over sites, zero on the diagonal.
#[derive(Clone, Debug)]
pub struct SiteGraph {
    rates: Vec<Vec<Rat>>,
}

impl SiteGraph {
    /// All pairs at rate 1.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.rates[i][j] = Rat::from_int(1);
                }
            }
        }
        g
    }

    /// Nearest neighbours on a ring at rate 1 (a single edge for `n = 2`).
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        if n == 2 {
            g.rates[0][1] = Rat::from_int(1);
            g.rates[1][0] = Rat::from_int(1);
            return g;
        }
        for i in 0..n {
            let j = (i + 1) % n;
            g.rates[i][j] = Rat::from_int(1);
            g.rates[j][i] = Rat::from_int(1);
        }
        g
    }

    /// Nearest neighbours on a segment at rate 1.
    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n.saturating_sub(1) {
            g.rates[i][i + 1] = Rat::from_int(1);
            g.rates[i + 1][i] = Rat::from_int(1);
        }
        g
    }

    /// Explicit undirected edges with nonnegative rational rates.
    pub fn from_edges(n: usize, edges: &[(usize, usize, Rat)]) -> Result<Self, SpaceError> {
        let mut g = Self::empty(n);
        for (i, j, r) in edges {
            let (i, j) = (*i, *j);
            if i >= n || j >= n {
                return Err(SpaceError::BadEdge { i, j, reason: "site out of range".into() });
            }
            if i == j {
                return Err(SpaceError::BadEdge { i, j, reason: "self-loop".into() });
            }
            if r.is_negative() {
                return Err(SpaceError::BadEdge { i, j, reason: format!("negative rate {r}") });
            }
            if !g.rates[i][j].is_zero() {
                return Err(SpaceError::BadEdge { i, j, reason: "duplicate edge".into() });
            }
            g.rates[i][j] = r.clone();
            g.rates[j][i] = r.clone();
        }
        Ok(g)
    }

    fn empty(n: usize) -> Self {
        SiteGraph { rates: vec![vec![Rat::zero(); n]; n] }
    }

    pub fn sites(&self) -> usize {
        self.rates.len()
    }

    pub fn rate(&self, i: usize, j: usize) -> &Rat {
        &self.rates[i][j]
    }

    /// Undirected edges `(i, j, rate)` with `i < j` and nonzero rate.
    pub fn edges(&self) -> Vec<(usize, usize, &Rat)> {
        let n = self.sites();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if !self.rates[i][j].is_zero() {
                    out.push((i, j, &self.rates[i][j]));
                }
            }
        }
        out
    }

    /// Ordered pairs `(i, j)` with `i != j` and nonzero rate.
    pub fn ordered_pairs(&self) -> Vec<(usize, usize, &Rat)> {
        let n = self.sites();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && !self.rates[i][j].is_zero() {
                    out.push((i, j, &self.rates[i][j]));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::binomial;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    #[test]
    fn binary_two_sites_lexicographic() {
        let s = ConfigSpace::binary(2).unwrap();
        let got: Vec<&[u32]> = s.configs().iter().map(|c| c.as_slice()).collect();
        assert_eq!(got, vec![&[0, 0][..], &[0, 1], &[1, 0], &[1, 1]]);
    }

    #[test]
    fn capped_sector_enumeration() {
        let s = ConfigSpace::capped(2, 2).unwrap().sector(2).unwrap();
        let got: Vec<&[u32]> = s.configs().iter().map(|c| c.as_slice()).collect();
        assert_eq!(got, vec![&[0, 2][..], &[1, 1], &[2, 0]]);
    }

    #[test]
    fn binary_ten_sites_size() {
        assert_eq!(ConfigSpace::binary(10).unwrap().dim(), 1024);
    }

    #[test]
    fn binary_sector_sizes() {
        let s = ConfigSpace::binary(3).unwrap();
        assert_eq!(s.sector(1).unwrap().dim(), 3);
        assert!(matches!(s.sector(4), Err(SpaceError::EmptySector { total: 4 })));
    }

    #[test]
    fn capped_sector_matches_stars_and_bars() {
        // Weak compositions of 3 into 3 parts each at most 5: the cap does
        // not bind, so the count is binomial(3 + 3 - 1, 3 - 1).
        let s = ConfigSpace::capped(3, 5).unwrap().sector(3).unwrap();
        let expect = binomial(BigInt::from(5), BigInt::from(2));
        assert_eq!(BigInt::from(s.dim()), expect);
        assert_eq!(s.dim(), 10);
    }

    #[test]
    fn budget_rejects_oversized_space() {
        let err = ConfigSpace::product_with_budget(&[2; 24], 1 << 20);
        assert!(matches!(err, Err(SpaceError::BudgetExceeded { .. })));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(ConfigSpace::product(&[]), Err(SpaceError::NoSites)));
        assert!(matches!(ConfigSpace::product(&[2, 0]), Err(SpaceError::ZeroCardinality)));
    }

    #[test]
    fn graph_presets() {
        let g = SiteGraph::complete(3);
        assert_eq!(g.edges().len(), 3);
        let c = SiteGraph::cycle(4);
        assert_eq!(c.edges().len(), 4);
        let c2 = SiteGraph::cycle(2);
        assert_eq!(c2.edges().len(), 1);
        let p = SiteGraph::path(4);
        assert_eq!(p.edges().len(), 3);
        assert_eq!(p.rate(0, 2), &Rat::zero());
        assert_eq!(p.rate(2, 1), &Rat::from_int(1));
    }

    #[test]
    fn graph_edge_validation() {
        let r1 = Rat::from_int(1);
        assert!(SiteGraph::from_edges(2, &[(0, 0, r1.clone())]).is_err());
        assert!(SiteGraph::from_edges(2, &[(0, 3, r1.clone())]).is_err());
        assert!(SiteGraph::from_edges(2, &[(0, 1, Rat::from_int(-1))]).is_err());
        assert!(
            SiteGraph::from_edges(3, &[(0, 1, r1.clone()), (1, 0, r1.clone())]).is_err(),
            "duplicate edge must be rejected"
        );
        let g = SiteGraph::from_edges(3, &[(0, 1, r1.clone()), (1, 2, Rat::new(1, 2).unwrap())])
            .unwrap();
        assert_eq!(g.rate(2, 1), &Rat::new(1, 2).unwrap());
        assert_eq!(g.ordered_pairs().len(), 4);
    }

    // Any sector decomposes the full space without loss or overlap.
    #[test]
    fn sectors_partition_the_space() {
        let s = ConfigSpace::capped(3, 2).unwrap();
        let max_total: u64 = 6;
        let mut seen = 0;
        for t in 0..=max_total {
            if let Ok(sec) = s.sector(t) {
                seen += sec.dim();
            }
        }
        assert_eq!(seen, s.dim());
    }

    proptest! {
        #[test]
        fn index_config_bijection(cards in proptest::collection::vec(1u32..5, 1..5)) {
            let s = ConfigSpace::product(&cards).unwrap();
            for i in 0..s.dim() {
                prop_assert_eq!(s.index_of(s.config(i)), Some(i));
            }
            // Indices are dense and unique by construction of the map.
            prop_assert_eq!(s.dim(), s.configs().len());
        }

        #[test]
        fn enumeration_is_strictly_lexicographic(cards in proptest::collection::vec(1u32..4, 1..5)) {
            let s = ConfigSpace::product(&cards).unwrap();
            for w in s.configs().windows(2) {
                prop_assert!(w[0] < w[1]);
            }
        }
    }
}
