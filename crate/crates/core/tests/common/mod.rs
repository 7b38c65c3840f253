//! Oracles and fixtures shared by the integration test targets.
//!
//! Nothing here calls into the library's coproduct, grafting or counting code:
//! the oracles rebuild those quantities from first principles so they can be
//! compared against the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use branched_core::hopf::ForestSeries;
use branched_core::roughpath::{ito_lift, simulate_bm, GridRoughPath};
use branched_core::scalar::{qr, Q};
use branched_core::trees::{CanonicalForest, CanonicalTree, Label};
use num::{BigInt, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A forest flattened into nodes with parent links (`None` for roots).
struct Flat {
    labels: Vec<Label>,
    parent: Vec<Option<usize>>,
}

fn flatten(f: &CanonicalForest) -> Flat {
    fn push(t: &CanonicalTree, parent: Option<usize>, out: &mut Flat) {
        let me = out.labels.len();
        out.labels.push(t.label());
        out.parent.push(parent);
        for c in t.children() {
            push(c, Some(me), out);
        }
    }
    let mut out = Flat {
        labels: Vec::new(),
        parent: Vec::new(),
    };
    for t in f.trees() {
        push(t, None, &mut out);
    }
    out
}

impl Flat {
    fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        while let Some(p) = self.parent[b] {
            if p == a {
                return true;
            }
            b = p;
        }
        false
    }

    /// Canonical tree hanging at `v`, restricted to nodes in `keep`.
    fn tree_at(&self, v: usize, keep: &[bool]) -> CanonicalTree {
        let kids = (0..self.labels.len())
            .filter(|&c| keep[c] && self.parent[c] == Some(v))
            .map(|c| self.tree_at(c, keep))
            .collect();
        CanonicalTree::new(self.labels[v], kids)
    }
}

/// `⟨τ ⊗ σ, Δρ⟩` for every pair, by brute force over antichains of nodes:
/// a chosen node sends its whole subtree to the branch side `τ`, and what is
/// left is the trunk `σ`. The empty antichain gives `1 ⊗ ρ`; choosing all
/// roots gives `ρ ⊗ 1`.
pub fn cut_pairing(rho: &CanonicalForest) -> BTreeMap<(CanonicalForest, CanonicalForest), u64> {
    let flat = flatten(rho);
    let n = flat.labels.len();
    let mut out = BTreeMap::new();
    for mask in 0u64..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if chosen
            .iter()
            .any(|&a| chosen.iter().any(|&b| a != b && flat.is_ancestor(a, b)))
        {
            continue;
        }
        let in_branch: Vec<bool> = (0..n)
            .map(|v| chosen.iter().any(|&c| c == v || flat.is_ancestor(c, v)))
            .collect();
        let all = vec![true; n];
        let branch = CanonicalForest::from_trees(chosen.iter().map(|&c| flat.tree_at(c, &all)).collect());
        let trunk_keep: Vec<bool> = in_branch.iter().map(|b| !b).collect();
        let trunk = CanonicalForest::from_trees(
            (0..n)
                .filter(|&v| trunk_keep[v] && flat.parent[v].is_none_or(|p| !trunk_keep[p]))
                .map(|v| flat.tree_at(v, &trunk_keep))
                .collect(),
        );
        *out.entry((branch, trunk)).or_insert(0) += 1;
    }
    out
}

/// Counts of `d`-labelled rooted trees and forests with `1..=n` nodes from the
/// Euler transform, independently of any enumeration.
pub fn tree_and_forest_counts(n: usize, d: u64) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut trees = vec![BigInt::zero(); n + 1];
    let mut forests = vec![BigInt::zero(); n + 1];
    forests[0] = BigInt::one();
    for m in 1..=n {
        trees[m] = &forests[m - 1] * d;
        // Euler transform: m F_m = Σ_{k=1}^{m} (Σ_{j | k} j t_j) F_{m-k}
        let mut acc = BigInt::zero();
        for k in 1..=m {
            let c: BigInt = (1..=k).filter(|j| k % j == 0).map(|j| &trees[j] * j).sum();
            acc += c * &forests[m - k];
        }
        forests[m] = acc / m;
    }
    (trees, forests)
}

/// Generator counts `g_m` from `Σ g_m x^m = 1 − 1/F(x)`.
pub fn poincare_generator_counts(n: usize, d: u64) -> Vec<BigInt> {
    let (_, f) = tree_and_forest_counts(n, d);
    // inverse series h = 1/F, then g = −h for m ≥ 1
    let mut h = vec![BigInt::zero(); n + 1];
    h[0] = BigInt::one();
    for m in 1..=n {
        let s: BigInt = (1..=m).map(|k| &f[k] * &h[m - k]).sum();
        h[m] = -s;
    }
    h.into_iter().skip(1).map(|x| -x).collect()
}

/// Random small rational.
pub fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    qr(rng.random_range(-6..=6), rng.random_range(1..=4))
}

/// Random element supported on the given forests (unit coefficient forced to
/// `unit` when given).
pub fn random_series(forests: &[CanonicalForest], trunc: usize, unit: Option<Q>, rng: &mut ChaCha8Rng) -> ForestSeries<Q> {
    let mut s = ForestSeries::zero(Some(trunc));
    for f in forests {
        if f.is_unit() {
            if let Some(u) = &unit {
                s.add_term(f.clone(), u.clone());
                continue;
            }
        }
        if rng.random_bool(0.7) {
            s.add_term(f.clone(), rand_q(rng));
        }
    }
    s
}

pub fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Itô lift of a dyadically rounded Brownian sample, `p = 5/2`.
pub fn random_driver(d: usize, steps: usize, seed: u64, bits: i32) -> GridRoughPath {
    let path = simulate_bm(d, steps, &identity(d), 1.0, seed).expect("valid covariance").rationalize(bits);
    ito_lift(&path, qr(5, 2)).expect("valid path")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
