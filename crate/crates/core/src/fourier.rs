//! Unitary representations of the signature group and the resulting
//! non-commutative characteristic function of a sample of signatures.
//!
//! A representation assigns an anti-Hermitian matrix `A_j` to finitely many
//! generators; a word `R` acts as `A_{r₁}⋯A_{r_m}`. On a group-like `g` the
//! value is `exp(M(log g))`, which is unitary by construction.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freebasis::{GeneratorBasis, Word};
use crate::hopf::{grouplike_check, log_star, parse_series, ForestSeries};
use crate::scalar::{Scalar, Q};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

const ANTI_HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    dim: usize,
    entries: BTreeMap<u32, CMatrix>,
}

fn anti_hermitian_part(a: &CMatrix) -> CMatrix {
    (a - a.adjoint()).scale(0.5)
}

impl Representation {
    pub fn new(dim: usize, entries: BTreeMap<u32, CMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("representation dimension must be positive"));
        }
        for (j, a) in &entries {
            if *j == 0 || a.nrows() != dim || a.ncols() != dim {
                return Err(Error::invariant(format!("matrix for generator {j} must be {dim}×{dim}, index ≥ 1")));
            }
            let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let defect = (a + a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if defect > ANTI_HERMITIAN_TOL * scale {
                return Err(Error::invariant(format!("matrix for generator {j} is not anti-Hermitian")));
            }
        }
        Ok(Representation { dim, entries })
    }

    /// One-dimensional representation `τ_j ↦ iθ`.
    pub fn scalar(j: u32, theta: f64) -> Self {
        let m = CMatrix::from_element(1, 1, C64::new(0.0, theta));
        Representation {
            dim: 1,
            entries: BTreeMap::from([(j, m)]),
        }
    }

    /// Independent Gaussian entries on each listed generator, anti-Hermitized.
    pub fn random(dim: usize, generators: &[u32], scale: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = BTreeMap::new();
        for &j in generators {
            let g = CMatrix::from_fn(dim, dim, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(scale * re, scale * im)
            });
            entries.insert(j, anti_hermitian_part(&g));
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &BTreeMap<u32, CMatrix> {
        &self.entries
    }

    /// `A_{r₁} ⋯ A_{r_m}`; zero if any letter is unassigned.
    pub fn word_matrix(&self, w: &[u32]) -> CMatrix {
        let mut m = CMatrix::identity(self.dim, self.dim);
        for r in w {
            match self.entries.get(r) {
                Some(a) => m *= a,
                None => return CMatrix::zeros(self.dim, self.dim),
            }
        }
        m
    }

    /// `M(Σ λ_R R) = Σ λ_R A_R`.
    pub fn evaluate_words<S: Scalar>(&self, words: &BTreeMap<Word, S>) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (w, c) in words {
            if w.iter().all(|r| self.entries.contains_key(r)) {
                out += self.word_matrix(w).scale(c.to_f64());
            }
        }
        out
    }

    /// `A ⊗ I + I ⊗ B` on every generator: matrix coefficients of this
    /// representation are products of those of the factors.
    pub fn tensor_product(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let keys: std::collections::BTreeSet<u32> = self.entries.keys().chain(other.entries.keys()).copied().collect();
        let zero_a = CMatrix::zeros(n, n);
        let zero_b = CMatrix::zeros(m, m);
        let entries = keys
            .into_iter()
            .map(|j| {
                let a = self.entries.get(&j).unwrap_or(&zero_a);
                let b = other.entries.get(&j).unwrap_or(&zero_b);
                let k = a.kronecker(&CMatrix::identity(m, m)) + CMatrix::identity(n, n).kronecker(b);
                (j, k)
            })
            .collect();
        Representation { dim: n * m, entries }
    }

    pub fn to_json(&self) -> RepJson {
        RepJson {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(j, a)| {
                    let flat = (0..self.dim)
                        .flat_map(|r| (0..self.dim).map(move |c| (r, c)))
                        .map(|(r, c)| [a[(r, c)].re, a[(r, c)].im])
                        .collect();
                    (j.to_string(), flat)
                })
                .collect(),
        }
    }
}

/// `rep.json`: matrices as row-major lists of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepJson {
    pub dim: usize,
    pub entries: BTreeMap<String, Vec<[f64; 2]>>,
}

impl RepJson {
    pub fn to_representation(&self) -> Result<Representation> {
        let n = self.dim;
        let mut entries = BTreeMap::new();
        for (key, flat) in &self.entries {
            let j: u32 = key
                .parse()
                .map_err(|_| Error::invariant(format!("generator key {key:?} is not a positive integer")))?;
            if flat.len() != n * n {
                return Err(Error::invariant(format!("generator {j}: expected {} entries", n * n)));
            }
            entries.insert(j, CMatrix::from_fn(n, n, |r, c| C64::new(flat[r * n + c][0], flat[r * n + c][1])));
        }
        Representation::new(n, entries)
    }
}

impl GeneratorBasis {
    /// [`GeneratorBasis::rewrite_to_words`] for any coefficient type.
    pub fn rewrite_to_words_scalar<S: Scalar>(&self, a: &ForestSeries<S>) -> Result<BTreeMap<Word, S>> {
        let mut out: BTreeMap<Word, S> = BTreeMap::new();
        for (f, c) in a.iter() {
            let row = self
                .forward_table()
                .get(f)
                .ok_or_else(|| Error::domain(format!("forest {f} lies outside the basis range")))?;
            for (w, l) in row {
                let e = out.entry(w.clone()).or_insert_with(S::zero);
                *e = e.clone() + c.clone() * S::from_q(l);
            }
        }
        Ok(out)
    }
}

fn level_of<S: Scalar>(g: &ForestSeries<S>) -> usize {
    g.truncation().unwrap_or_else(|| g.max_degree())
}

/// `U = exp(M(log g))` for a group-like `g`.
pub fn evaluate_on_grouplike<S: Scalar>(rep: &Representation, g: &ForestSeries<S>, basis: &GeneratorBasis) -> Result<CMatrix> {
    let level = level_of(g);
    if !grouplike_check(g, level) {
        return Err(Error::domain("Fourier evaluation needs a group-like element"));
    }
    let mut g = g.clone();
    g.add_term(crate::trees::CanonicalForest::unit(), S::one() - g.unit_coeff());
    let log = rep.evaluate_words(&basis.rewrite_to_words_scalar(&log_star(&g, level)?)?);
    Ok(anti_hermitian_part(&log).exp())
}

/// Largest entry of `|U*U − I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of the difference between `exp(M(log g))` and the direct
/// word sum `M(g)` of the truncated series; this is the truncation error of
/// the finite-level transform.
pub fn truncation_discrepancy<S: Scalar>(rep: &Representation, g: &ForestSeries<S>, basis: &GeneratorBasis) -> Result<f64> {
    let u = evaluate_on_grouplike(rep, g, basis)?;
    let direct = rep.evaluate_words(&basis.rewrite_to_words_scalar(g)?);
    Ok((u - direct).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Sample mean of `U(g)` with entrywise standard errors
/// (`sqrt((Var Re + Var Im)/n)`).
#[derive(Debug, Clone)]
pub struct CharEstimate {
    pub mean: CMatrix,
    pub stderr: DMatrix<f64>,
    pub samples: usize,
}

pub fn char_function<S: Scalar>(samples: &[ForestSeries<S>], rep: &Representation, basis: &GeneratorBasis) -> Result<CharEstimate> {
    if samples.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let values: Vec<CMatrix> = samples
        .par_iter()
        .map(|g| evaluate_on_grouplike(rep, g, basis))
        .collect::<Result<_>>()?;
    let n = rep.dim();
    let count = values.len() as f64;
    let mut mean = CMatrix::zeros(n, n);
    for v in &values {
        mean += v;
    }
    mean /= C64::new(count, 0.0);
    let mut var = DMatrix::<f64>::zeros(n, n);
    for v in &values {
        var += (v - &mean).map(|z| z.norm_sqr());
    }
    let denom = (count - 1.0).max(1.0) * count;
    Ok(CharEstimate {
        mean,
        stderr: var.map(|s| (s / denom).sqrt()),
        samples: values.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RepDiscrepancy {
    pub representation: usize,
    pub max_abs_difference: f64,
    /// Largest `|mean_A − mean_B| / sqrt(se_A² + se_B²)` over entries.
    pub max_z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistinguishReport {
    pub z_band: f64,
    pub per_representation: Vec<RepDiscrepancy>,
    /// True when some entry differs beyond the band. A false verdict does
    /// not certify equal laws.
    pub distinguished: bool,
}

/// Compare two samples through a finite family of representations.
pub fn distinguish<S: Scalar>(a: &[ForestSeries<S>], b: &[ForestSeries<S>], reps: &[Representation], z_band: f64, basis: &GeneratorBasis) -> Result<DistinguishReport> {
    let mut per = Vec::new();
    for (k, rep) in reps.iter().enumerate() {
        let ea = char_function(a, rep, basis)?;
        let eb = char_function(b, rep, basis)?;
        let mut max_abs = 0.0f64;
        let mut max_z = 0.0f64;
        for idx in 0..rep.dim() * rep.dim() {
            let diff = (ea.mean[idx] - eb.mean[idx]).norm();
            let se = (ea.stderr[idx].powi(2) + eb.stderr[idx].powi(2)).sqrt();
            max_abs = max_abs.max(diff);
            let z = if se > 0.0 {
                diff / se
            } else if diff > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            max_z = max_z.max(z);
        }
        per.push(RepDiscrepancy {
            representation: k,
            max_abs_difference: max_abs,
            max_z,
        });
    }
    let distinguished = per.iter().any(|r| r.max_z > z_band);
    Ok(DistinguishReport {
        z_band,
        per_representation: per,
        distinguished,
    })
}

/// `sigs.json`: a sample of signatures at a common level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigsJson {
    pub level: usize,
    pub signatures: Vec<String>,
}

impl SigsJson {
    pub fn from_series(level: usize, sigs: &[ForestSeries<Q>]) -> Self {
        SigsJson {
            level,
            signatures: sigs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn to_series(&self) -> Result<Vec<ForestSeries<Q>>> {
        self.signatures
            .iter()
            .map(|s| {
                let g = parse_series(s, None)?;
                if g.max_degree() > self.level {
                    return Err(Error::invariant(format!("signature has terms above level {}", self.level)));
                }
                Ok(g.with_truncation(Some(self.level)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::exp_star;
    use crate::tensoriso::{tensor_mul, PiScaling, TensorSeries};

    #[test]
    fn unit_and_abelian_cases() {
        let basis = GeneratorBasis::compute(2, 1).unwrap();
        let rep = Representation::scalar(1, 0.7);
        let u = evaluate_on_grouplike(&rep, &ForestSeries::<Q>::unit(Some(2)), &basis).unwrap();
        assert!((u[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let g = exp_star(&parse_series("3/2*1", None).unwrap(), 2).unwrap();
        let u = evaluate_on_grouplike(&rep, &g, &basis).unwrap();
        assert!((u[(0, 0)] - C64::new(0.0, 0.7 * 1.5).exp()).norm() < 1e-14);
        let bad = parse_series("1 + 1*1 + 2*1 1", Some(2)).unwrap();
        assert!(evaluate_on_grouplike(&rep, &bad, &basis).is_err());
    }

    #[test]
    fn word_evaluation_is_multiplicative() {
        let rep = Representation::random(3, &[1, 2, 3], 1.0, 5).unwrap();
        let s = PiScaling::new(crate::scalar::qr(5, 2), &[1, 1, 2]).unwrap();
        let cap = crate::scalar::q(2);
        let v = TensorSeries::from_words([(vec![1], 0.5), (vec![3], -1.0)], s.clone(), cap.clone()).unwrap();
        let w = TensorSeries::from_words([(vec![2], 2.0), (vec![1, 2], 0.25)], s, cap).unwrap();
        let vw = tensor_mul(&v, &w).unwrap();
        let lhs = rep.evaluate_words(vw.terms());
        let rhs = rep.evaluate_words(v.terms()) * rep.evaluate_words(w.terms());
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn json_round_trip() {
        let rep = Representation::random(2, &[1, 4], 0.3, 11).unwrap();
        assert_eq!(rep.to_json().to_representation().unwrap(), rep);
        let mut j = rep.to_json();
        j.entries.get_mut("1").unwrap()[1] = [5.0, 0.0];
        assert!(j.to_representation().is_err());
    }
}
