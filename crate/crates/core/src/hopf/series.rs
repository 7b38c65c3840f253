use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::scalar::{Scalar, Q};
use crate::trees::{CanonicalForest, CanonicalTree, Label};

/// Finitely supported linear combination of forests.
///
/// `truncation = Some(n)` marks an element of the quotient keeping forests
/// with at most `n` nodes; `None` is an element of the untruncated algebra.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct ForestSeries<S = Q> {
    terms: BTreeMap<CanonicalForest, S>,
    truncation: Option<usize>,
}

pub(crate) fn min_trunc(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

pub(crate) fn within(trunc: Option<usize>, degree: usize) -> bool {
    trunc.is_none_or(|n| degree <= n)
}

impl<S: Scalar> ForestSeries<S> {
    pub fn zero(truncation: Option<usize>) -> Self {
        ForestSeries {
            terms: BTreeMap::new(),
            truncation,
        }
    }

    pub fn unit(truncation: Option<usize>) -> Self {
        Self::from_forest(CanonicalForest::unit(), truncation)
    }

    pub fn from_forest(f: CanonicalForest, truncation: Option<usize>) -> Self {
        let mut s = Self::zero(truncation);
        s.add_term(f, S::one());
        s
    }

    pub fn from_tree(t: CanonicalTree, truncation: Option<usize>) -> Self {
        Self::from_forest(CanonicalForest::single(t), truncation)
    }

    pub fn from_terms<I>(terms: I, truncation: Option<usize>) -> Self
    where
        I: IntoIterator<Item = (CanonicalForest, S)>,
    {
        let mut s = Self::zero(truncation);
        for (f, c) in terms {
            s.add_term(f, c);
        }
        s
    }

    /// Add `c·f`, dropping it when `f` lies above the truncation level.
    pub fn add_term(&mut self, f: CanonicalForest, c: S) {
        if c.is_zero() || !within(self.truncation, f.node_count()) {
            return;
        }
        match self.terms.entry(f) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn coeff(&self, f: &CanonicalForest) -> S {
        self.terms.get(f).cloned().unwrap_or_else(S::zero)
    }

    pub fn unit_coeff(&self) -> S {
        self.coeff(&CanonicalForest::unit())
    }

    pub fn terms(&self) -> &BTreeMap<CanonicalForest, S> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalForest, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    /// Project onto forests with at most `n` nodes (the map ρ^n).
    pub fn truncate(&self, n: usize) -> Self {
        let trunc = min_trunc(self.truncation, Some(n));
        ForestSeries {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| f.node_count() <= n)
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
            truncation: trunc,
        }
    }

    /// Reinterpret in a quotient with a different level. Terms above the
    /// new level are discarded; raising the level keeps all terms.
    pub fn with_truncation(&self, truncation: Option<usize>) -> Self {
        ForestSeries::from_terms(
            self.terms.iter().map(|(f, c)| (f.clone(), c.clone())),
            truncation,
        )
    }

    /// Homogeneous component with exactly `n` nodes (the map π^n).
    pub fn homogeneous(&self, n: usize) -> Self {
        ForestSeries {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| f.node_count() == n)
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
            truncation: self.truncation,
        }
    }

    /// Projection onto single-tree forests.
    pub fn trees_part(&self) -> Self {
        ForestSeries {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| f.trees().len() == 1)
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
            truncation: self.truncation,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|f| f.node_count()).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|f| f.node_count()).min()
    }

    pub fn max_label(&self) -> Label {
        self.terms.keys().map(|f| f.max_label()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &S) -> Self {
        ForestSeries::from_terms(
            self.terms.iter().map(|(f, v)| (f.clone(), v.clone() * c.clone())),
            self.truncation,
        )
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ForestSeries<T> {
        ForestSeries::from_terms(
            self.terms.iter().map(|(k, v)| (k.clone(), f(v))),
            self.truncation,
        )
    }

    pub fn to_f64(&self) -> ForestSeries<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Coefficient-wise comparison with [`Scalar::near`].
    pub fn near(&self, other: &Self) -> bool {
        let keys: std::collections::BTreeSet<&CanonicalForest> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .all(|k| self.coeff(k).near(&other.coeff(k)))
    }

    /// Euclidean norm of the coefficients in the orthonormal forest basis.
    pub fn norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| {
                let v = c.to_f64();
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl ForestSeries<Q> {
    pub fn from_f64_exact(s: &ForestSeries<f64>) -> crate::error::Result<Self> {
        let mut out = ForestSeries::zero(s.truncation());
        for (f, c) in s.iter() {
            out.add_term(f.clone(), crate::scalar::q_from_f64(*c)?);
        }
        Ok(out)
    }
}

impl<S: Scalar> Add for &ForestSeries<S> {
    type Output = ForestSeries<S>;
    fn add(self, rhs: &ForestSeries<S>) -> ForestSeries<S> {
        let mut out = self.with_truncation(min_trunc(self.truncation, rhs.truncation));
        for (f, c) in rhs.iter() {
            out.add_term(f.clone(), c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &ForestSeries<S> {
    type Output = ForestSeries<S>;
    fn sub(self, rhs: &ForestSeries<S>) -> ForestSeries<S> {
        let mut out = self.with_truncation(min_trunc(self.truncation, rhs.truncation));
        for (f, c) in rhs.iter() {
            out.add_term(f.clone(), -c.clone());
        }
        out
    }
}

impl<S: Scalar> Neg for &ForestSeries<S> {
    type Output = ForestSeries<S>;
    fn neg(self) -> ForestSeries<S> {
        self.scale(&-S::one())
    }
}
