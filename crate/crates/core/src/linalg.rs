//! Exact sparse Gauss–Jordan elimination with tracked row combinations.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::scalar::Q;

pub(crate) type SparseVec = BTreeMap<usize, Q>;

fn axpy(y: &mut SparseVec, a: &Q, x: &SparseVec) {
    for (k, v) in x {
        let entry = y.entry(*k).or_insert_with(Q::zero);
        *entry += a * v;
        if entry.is_zero() {
            y.remove(k);
        }
    }
}

fn scale(x: &mut SparseVec, a: &Q) {
    for v in x.values_mut() {
        *v *= a;
    }
}

/// Reduced row echelon form maintained incrementally.
///
/// Each row carries `aug`, the combination of inserted vectors that produced
/// it, so that once the rows span everything, the row pivoted at column `c`
/// expresses the unit vector `e_c` in terms of the inserted vectors.
#[derive(Default)]
pub(crate) struct Echelon {
    rows: BTreeMap<usize, (SparseVec, SparseVec)>,
}

impl Echelon {
    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut SparseVec, aug: &mut SparseVec) {
        let pivots: Vec<usize> = v.keys().copied().filter(|k| self.rows.contains_key(k)).collect();
        for p in pivots {
            if let Some(c) = v.get(&p).cloned() {
                let (row, row_aug) = &self.rows[&p];
                axpy(v, &-c.clone(), row);
                axpy(aug, &-c, row_aug);
            }
        }
    }

    /// Whether `v` lies outside the current span.
    pub(crate) fn is_independent(&self, v: &SparseVec) -> bool {
        let mut v = v.clone();
        let mut aug = SparseVec::new();
        self.reduce(&mut v, &mut aug);
        !v.is_empty()
    }

    /// Insert `v` with label `tag`; returns false when `v` was dependent.
    pub(crate) fn insert(&mut self, v: &SparseVec, tag: usize) -> bool {
        let mut v = v.clone();
        let mut aug = SparseVec::from([(tag, Q::one())]);
        self.reduce(&mut v, &mut aug);
        if v.is_empty() {
            return false;
        }
        // prefer a ±1 pivot, otherwise the first column
        let pivot = v
            .iter()
            .find(|(_, c)| c.abs().is_one())
            .map(|(k, _)| *k)
            .unwrap_or_else(|| *v.keys().next().expect("non-empty"));
        let inv = v[&pivot].recip();
        scale(&mut v, &inv);
        scale(&mut aug, &inv);
        for (row, row_aug) in self.rows.values_mut() {
            if let Some(c) = row.get(&pivot).cloned() {
                axpy(row, &-c.clone(), &v);
                axpy(row_aug, &-c, &aug);
            }
        }
        self.rows.insert(pivot, (v, aug));
        true
    }

    /// Combination of inserted vectors equal to `e_col`, valid once the
    /// rows span the whole space (the reduced matrix is then the identity).
    pub(crate) fn unit_combination(&self, col: usize) -> Option<&SparseVec> {
        self.rows.get(&col).map(|(_, aug)| aug)
    }
}
