//! Grafting realization of ⋆, kept as an independent cross-check of the
//! cut-table product.
//!
//! The classical grafting product attaches each tree of the left forest to a
//! node of the right forest or leaves it as a new root, summing over all such
//! maps. It is dual to the Connes–Kreimer coproduct for the pairing weighted
//! by symmetry factors, so in the orthonormal basis the coefficient of ρ is
//! rescaled by `sym(ρ) / (sym(σ) sym(τ))`.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{Integer, ToPrimitive, Zero};

use crate::trees::{forest_symmetry_factor, CanonicalForest, CanonicalTree, Label};

#[derive(Clone, Default)]
struct Arena {
    labels: Vec<Label>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl Arena {
    fn push_tree(&mut self, t: &CanonicalTree) -> usize {
        let id = self.labels.len();
        self.labels.push(t.label());
        self.children.push(Vec::new());
        for c in t.children() {
            let cid = self.push_tree(c);
            self.children[id].push(cid);
        }
        id
    }

    fn from_forest(f: &CanonicalForest) -> Self {
        let mut a = Arena::default();
        for t in f.trees() {
            let id = a.push_tree(t);
            a.roots.push(id);
        }
        a
    }

    fn build(&self, id: usize) -> CanonicalTree {
        CanonicalTree::new(
            self.labels[id],
            self.children[id].iter().map(|&c| self.build(c)).collect(),
        )
    }

    fn to_forest(&self) -> CanonicalForest {
        CanonicalForest::from_trees(self.roots.iter().map(|&r| self.build(r)).collect())
    }
}

/// Raw grafting product: forest -> number of grafting maps producing it.
pub fn grafting_counts(left: &CanonicalForest, right: &CanonicalForest) -> BTreeMap<CanonicalForest, u64> {
    let base = Arena::from_forest(right);
    let slots = base.labels.len() + 1; // last slot = new root
    let k = left.trees().len();
    let mut out = BTreeMap::new();
    let mut assignment = vec![0usize; k];
    loop {
        let mut a = base.clone();
        for (t, &slot) in left.trees().iter().zip(&assignment) {
            let id = a.push_tree(t);
            if slot == slots - 1 {
                a.roots.push(id);
            } else {
                a.children[slot].push(id);
            }
        }
        *out.entry(a.to_forest()).or_insert(0) += 1;
        // odometer
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            assignment[i] += 1;
            if assignment[i] < slots {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

/// ⋆ on basis forests via grafting, rescaled to the orthonormal basis.
pub fn grafting_product(left: &CanonicalForest, right: &CanonicalForest) -> BTreeMap<CanonicalForest, u64> {
    let denom = forest_symmetry_factor(left) * forest_symmetry_factor(right);
    grafting_counts(left, right)
        .into_iter()
        .map(|(rho, n)| {
            let num = BigInt::from(n) * forest_symmetry_factor(&rho);
            let (q, r) = num.div_rem(&denom);
            assert!(r.is_zero(), "non-integral rescaled grafting coefficient");
            (rho, q.to_u64().expect("coefficient fits u64"))
        })
        .collect()
}
