use std::collections::HashMap;

use super::{star_forests, ForestSeries};
use crate::scalar::Q;
use crate::trees::{enumerate_forests_upto, CanonicalForest, Label};

/// Truncated ⋆-algebra over `f64` with forests indexed densely.
///
/// Used in the Monte Carlo loops where sparse big-rational series would
/// dominate the run time. Structure constants are computed once, exactly,
/// and grouped by left index.
pub struct DenseAlgebra {
    level: usize,
    forests: Vec<CanonicalForest>,
    index: HashMap<CanonicalForest, usize>,
    degrees: Vec<usize>,
    /// `table[i]` lists `(j, k, c)` with `e_i ⋆ e_j ∋ c·e_k`, both non-unit.
    table: Vec<Vec<(usize, usize, f64)>>,
}

impl DenseAlgebra {
    pub fn new(level: usize, d: Label) -> Self {
        let forests = enumerate_forests_upto(level, d);
        let index: HashMap<_, _> = forests.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let degrees: Vec<usize> = forests.iter().map(|f| f.node_count()).collect();
        let mut table = vec![Vec::new(); forests.len()];
        for (i, a) in forests.iter().enumerate().skip(1) {
            for (j, b) in forests.iter().enumerate().skip(1) {
                if degrees[i] + degrees[j] > level {
                    continue;
                }
                let prod: ForestSeries<Q> = star_forests(a, b, Some(level));
                for (rho, c) in prod.iter() {
                    table[i].push((j, index[rho], num::ToPrimitive::to_f64(c).unwrap_or(f64::NAN)));
                }
            }
        }
        DenseAlgebra { level, forests, index, degrees, table }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.forests.len()
    }

    pub fn forests(&self) -> &[CanonicalForest] {
        &self.forests
    }

    pub fn index_of(&self, f: &CanonicalForest) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn unit(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[0] = 1.0;
        v
    }

    pub fn from_series(&self, s: &ForestSeries<f64>) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for (f, c) in s.iter() {
            if let Some(i) = self.index_of(f) {
                v[i] += c;
            }
        }
        v
    }

    pub fn to_series(&self, v: &[f64]) -> ForestSeries<f64> {
        ForestSeries::from_terms(
            self.forests.iter().cloned().zip(v.iter().copied()),
            Some(self.level),
        )
    }

    /// `a ⋆ b`. Index 0 is always the unit forest.
    pub fn mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for k in 0..self.dim() {
            out[k] += a[0] * b[k] + a[k] * b[0];
        }
        out[0] -= a[0] * b[0];
        for (i, row) in self.table.iter().enumerate() {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            for &(j, k, c) in row {
                out[k] += ai * b[j] * c;
            }
        }
        out
    }

    /// ⋆-exponential of an element without unit component.
    pub fn exp(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.unit();
        let mut power = self.unit();
        for n in 1..=self.level {
            power = self.mul(&power, x);
            power.iter_mut().for_each(|v| *v /= n as f64);
            out.iter_mut().zip(&power).for_each(|(o, p)| *o += p);
        }
        out
    }

    /// ⋆-logarithm of an element with unit component one.
    pub fn log(&self, g: &[f64]) -> Vec<f64> {
        let mut x = g.to_vec();
        x[0] -= 1.0;
        let mut out = vec![0.0; self.dim()];
        let mut power = self.unit();
        for n in 1..=self.level {
            power = self.mul(&power, &x);
            let w = if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
            out.iter_mut().zip(&power).for_each(|(o, p)| *o += w * p);
        }
        out
    }

    /// Drop components above `n` nodes.
    pub fn project(&self, v: &mut [f64], n: usize) {
        for (x, &deg) in v.iter_mut().zip(&self.degrees) {
            if deg > n {
                *x = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::{exp_star, gl_product, parse_series};

    #[test]
    fn agrees_with_sparse_product() {
        let alg = DenseAlgebra::new(3, 2);
        let a = parse_series("1 + 1/2*1 - 3*2[1] + 1*1 2", Some(3)).unwrap();
        let b = parse_series("1 + 2*2 + 1/4*1[1] - 1*1 1 2", Some(3)).unwrap();
        let dense = alg.mul(&alg.from_series(&a.to_f64()), &alg.from_series(&b.to_f64()));
        assert!(alg.to_series(&dense).near(&gl_product(&a, &b).to_f64()));

        let x = parse_series("1/3*1 - 2*2 + 1*2[1]", Some(3)).unwrap();
        let e = alg.exp(&alg.from_series(&x.to_f64()));
        assert!(alg.to_series(&e).near(&exp_star(&x, 3).unwrap().to_f64()));
        let back = alg.log(&e);
        assert!(alg.to_series(&back).near(&x.to_f64()));
    }
}
