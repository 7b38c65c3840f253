//! Admissible cuts and the Connes–Kreimer coproduct.
//!
//! The product ⋆ is the transpose of the coproduct in the orthonormal forest
//! basis, so its structure constants are tabulated here once per
//! (total degree, label count) and shared by every caller.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use crate::trees::{enumerate_forests, CanonicalForest, CanonicalTree, Label};

/// Coproduct terms `(branch forest, trunk forest) -> multiplicity`.
pub type Coproduct = BTreeMap<(CanonicalForest, CanonicalForest), u64>;

/// Connes–Kreimer coproduct of a forest: sum over admissible cuts with the
/// pruned branches on the left and the trunk on the right.
pub fn ck_coproduct(f: &CanonicalForest) -> Coproduct {
    let mut memo = HashMap::new();
    forest_coproduct(f, &mut memo)
}

fn forest_coproduct(f: &CanonicalForest, memo: &mut HashMap<CanonicalTree, Coproduct>) -> Coproduct {
    let mut acc: Coproduct = BTreeMap::new();
    acc.insert((CanonicalForest::unit(), CanonicalForest::unit()), 1);
    for t in f.trees() {
        let dt = tree_coproduct(t, memo);
        let mut next: Coproduct = BTreeMap::new();
        for ((l1, r1), c1) in &acc {
            for ((l2, r2), c2) in dt.iter() {
                *next.entry((l1.concat(l2), r1.concat(r2))).or_insert(0) += c1 * c2;
            }
        }
        acc = next;
    }
    acc
}

fn tree_coproduct(t: &CanonicalTree, memo: &mut HashMap<CanonicalTree, Coproduct>) -> Coproduct {
    if let Some(c) = memo.get(t) {
        return c.clone();
    }
    let mut out: Coproduct = BTreeMap::new();
    out.insert((CanonicalForest::single(t.clone()), CanonicalForest::unit()), 1);
    for ((l, r), c) in forest_coproduct(&t.children_forest(), memo) {
        let trunk = CanonicalTree::new(t.label(), r.into_trees());
        *out.entry((l, CanonicalForest::single(trunk))).or_insert(0) += c;
    }
    memo.insert(t.clone(), out.clone());
    out
}

/// Single-edge cuts of a tree, aggregated: `(branch, trunk) -> count`.
pub fn single_cuts(t: &CanonicalTree) -> BTreeMap<(CanonicalTree, CanonicalTree), u64> {
    let mut out = BTreeMap::new();
    for (child, m) in t.child_classes() {
        let rest = t.without_child(child).expect("child present");
        *out.entry((child.clone(), rest.clone())).or_insert(0) += m as u64;
        for ((branch, sub_trunk), k) in single_cuts(child) {
            let mut kids = rest.children().to_vec();
            kids.push(sub_trunk);
            let trunk = CanonicalTree::new(t.label(), kids);
            *out.entry((branch, trunk)).or_insert(0) += k * m as u64;
        }
    }
    out
}

/// Structure constants of ⋆ for one total degree: for each ordered pair of
/// non-unit forests, the forests ρ and the number of admissible cuts of ρ
/// that produce that pair.
pub(crate) struct ProductTable {
    entries: HashMap<CanonicalForest, HashMap<CanonicalForest, Vec<(CanonicalForest, u64)>>>,
}

impl ProductTable {
    fn build(n: usize, d: Label) -> Self {
        let mut entries: HashMap<CanonicalForest, HashMap<CanonicalForest, Vec<(CanonicalForest, u64)>>> =
            HashMap::new();
        let mut memo = HashMap::new();
        for rho in enumerate_forests(n, d) {
            for ((l, r), c) in forest_coproduct(&rho, &mut memo) {
                if l.is_unit() || r.is_unit() {
                    continue;
                }
                entries
                    .entry(l)
                    .or_default()
                    .entry(r)
                    .or_default()
                    .push((rho.clone(), c));
            }
        }
        ProductTable { entries }
    }

    pub(crate) fn get(&self, a: &CanonicalForest, b: &CanonicalForest) -> &[(CanonicalForest, u64)] {
        self.entries
            .get(a)
            .and_then(|m| m.get(b))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }
}

type TableCache = RwLock<HashMap<(usize, Label), Arc<ProductTable>>>;

fn cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared product table for forests of total degree `n` over labels `1..=d`.
/// Concurrent first calls may build the table twice; both builds are equal.
pub(crate) fn product_table(n: usize, d: Label) -> Arc<ProductTable> {
    if let Some(t) = cache().read().expect("table cache poisoned").get(&(n, d)) {
        return Arc::clone(t);
    }
    let built = Arc::new(ProductTable::build(n, d));
    let mut w = cache().write().expect("table cache poisoned");
    Arc::clone(w.entry((n, d)).or_insert(built))
}
