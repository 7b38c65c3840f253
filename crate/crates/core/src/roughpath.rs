//! Grid-based branched rough paths: Brownian sample paths, their Itô lift,
//! signatures, reversal, and expected signatures.
//!
//! Itô integrals are left-point sums on the sample grid and covariations are
//! sums of increment products, so the Itô–Stratonovich conversion holds
//! exactly on the grid rather than in a limit.

use nalgebra::{DMatrix, SymmetricEigen};
use num::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freebasis::{GeneratorBasis, Word, WordCoeffs};
use crate::hopf::{
    exp_star, gl_product, grouplike_check, inverse_star, log_star, parse_series, DenseAlgebra, ForestSeries,
};
use crate::scalar::{q, q_from_f64, qr, Q};
use crate::tensoriso::{psi, psi_inv, tensor_exp, tensor_log, tensor_mul, PiScaling, TensorSeries};
use crate::trees::{CanonicalForest, CanonicalTree, Label};

/// A discretely sampled `ℝ^d`-valued path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    pub scheme: String,
}

impl SamplePath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>, scheme: impl Into<String>) -> Result<Self> {
        let p = SamplePath {
            times,
            values,
            seed: None,
            scheme: scheme.into(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() || self.times.len() < 2 {
            return Err(Error::invariant("path needs at least two samples with matching times"));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1] || !w[0].is_finite() || !w[1].is_finite()) {
            return Err(Error::invariant("path times must be finite and strictly increasing"));
        }
        if self.times[0] < 0.0 || self.times[self.times.len() - 1] > 1.0 {
            return Err(Error::invariant("path times must lie in [0, 1]"));
        }
        let d = self.values[0].len();
        if d == 0 || self.values.iter().any(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
            return Err(Error::invariant("path values must be finite vectors of one common dimension"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Round every value to a multiple of `2^-bits`, so that the values are
    /// small dyadic rationals and exact algebra on them stays cheap.
    pub fn rationalize(&self, bits: i32) -> Self {
        let s = 2f64.powi(bits);
        SamplePath {
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|x| (x * s).round() / s).collect())
                .collect(),
            scheme: format!("{} (dyadic 2^-{bits})", self.scheme),
            ..self.clone()
        }
    }

    fn exact_increments(&self) -> Result<Vec<Vec<Q>>> {
        self.values
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| Ok(q_from_f64(*b)? - q_from_f64(*a)?)).collect())
            .collect()
    }
}

/// Factor `L` with `L Lᵀ = Σ` from the symmetric eigendecomposition;
/// rejects asymmetric or indefinite input.
pub fn covariance_factor(cov: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = cov.len();
    if d == 0 || cov.iter().any(|r| r.len() != d) {
        return Err(Error::domain("covariance must be a non-empty square matrix"));
    }
    let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    let scale = m.amax().max(1.0);
    if (&m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::domain("covariance must be symmetric"));
    }
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
        return Err(Error::domain("covariance is not positive semi-definite"));
    }
    let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt))
}

fn gaussian_steps(factor: &DMatrix<f64>, steps: usize, dt: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let d = factor.nrows();
    let sd = dt.sqrt();
    (0..steps)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            (0..d).map(|i| sd * (0..d).map(|j| factor[(i, j)] * z[j]).sum::<f64>()).collect()
        })
        .collect()
}

/// Brownian motion with covariance `Σ·horizon` at the end, sampled on the
/// uniform grid `k/steps` of `[0, 1]`.
pub fn simulate_bm(d: usize, steps: usize, cov: &[Vec<f64>], horizon: f64, seed: u64) -> Result<SamplePath> {
    if cov.len() != d {
        return Err(Error::domain(format!("covariance is {}×{}, dimension is {d}", cov.len(), cov.len())));
    }
    if steps == 0 || horizon.is_nan() || horizon <= 0.0 {
        return Err(Error::domain("need at least one step and a positive horizon"));
    }
    let factor = covariance_factor(cov)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![vec![0.0; d]];
    for dx in gaussian_steps(&factor, steps, horizon / steps as f64, &mut rng) {
        let last = values.last().expect("non-empty");
        values.push(last.iter().zip(&dx).map(|(a, b)| a + b).collect());
    }
    Ok(SamplePath {
        times: (0..=steps).map(|k| k as f64 / steps as f64).collect(),
        values,
        seed: Some(seed),
        scheme: "bm-exact-gaussian".into(),
    })
}

/// Multiplicative grid functional with group-like increments between
/// consecutive grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRoughPath {
    times: Vec<f64>,
    increments: Vec<ForestSeries<Q>>,
    p: Q,
    level: usize,
}

impl GridRoughPath {
    /// Validate the grid and that every increment is group-like at `level`.
    pub fn new(times: Vec<f64>, increments: Vec<ForestSeries<Q>>, p: Q, level: usize) -> Result<Self> {
        if times.len() != increments.len() + 1 || increments.is_empty() {
            return Err(Error::invariant("need one increment per grid interval"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invariant("grid times must be strictly increasing"));
        }
        for (k, inc) in increments.iter().enumerate() {
            if inc.max_degree() > level || !grouplike_check(inc, level) {
                return Err(Error::invariant(format!("increment {k} is not group-like at level {level}")));
            }
        }
        let increments = increments.into_iter().map(|i| i.with_truncation(Some(level))).collect();
        Ok(GridRoughPath { times, increments, p, level })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn increments(&self) -> &[ForestSeries<Q>] {
        &self.increments
    }

    pub fn p(&self) -> &Q {
        &self.p
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn dim(&self) -> Label {
        self.increments.iter().map(|i| i.max_label()).max().unwrap_or(0)
    }

    /// `X_{t_i, t_j}` as the ⋆-product of the steps in between.
    pub fn increment(&self, i: usize, j: usize) -> ForestSeries<Q> {
        assert!(i <= j && j <= self.steps(), "grid indices out of order");
        self.increments[i..j]
            .iter()
            .fold(ForestSeries::unit(Some(self.level)), |acc, x| gl_product(&acc, x))
    }

    /// Chen's identity `X_{s,u} ⋆ X_{u,t} = X_{s,t}` on every grid triple,
    /// comparing against increments supplied by `direct`.
    pub fn chen_check(&self, direct: impl Fn(usize, usize) -> ForestSeries<Q>) -> bool {
        let m = self.steps();
        let all: Vec<Vec<ForestSeries<Q>>> = (0..=m).map(|i| (0..=m).map(|j| if i <= j { direct(i, j) } else { ForestSeries::zero(None) }).collect()).collect();
        for i in 0..=m {
            for j in i..=m {
                for l in j..=m {
                    if gl_product(&all[i][j], &all[j][l]).with_truncation(Some(self.level)) != all[i][l].with_truncation(Some(self.level)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Time reversal: reversed grid and ⋆-inverse increments.
    pub fn reverse(&self) -> Self {
        let (t0, t1) = (self.times[0], self.times[self.times.len() - 1]);
        GridRoughPath {
            times: self.times.iter().rev().map(|t| t0 + t1 - t).collect(),
            increments: self
                .increments
                .iter()
                .rev()
                .map(|x| inverse_star(x, self.level).expect("group-like increments are invertible"))
                .collect(),
            p: self.p.clone(),
            level: self.level,
        }
    }

    /// Run `self` on `[0, ½]` and then `other` on `[½, 1]`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.level != other.level || self.p != other.p {
            return Err(Error::domain("concatenated paths need equal p and level"));
        }
        let squeeze = |ts: &[f64], offset: f64| -> Vec<f64> {
            let (a, b) = (ts[0], ts[ts.len() - 1]);
            ts.iter().map(|t| offset + 0.5 * (t - a) / (b - a)).collect()
        };
        let mut times = squeeze(&self.times, 0.0);
        times.extend(squeeze(&other.times, 0.5).into_iter().skip(1));
        let mut increments = self.increments.clone();
        increments.extend(other.increments.iter().cloned());
        Ok(GridRoughPath {
            times,
            increments,
            p: self.p.clone(),
            level: self.level,
        })
    }
}

fn check_ito_p(p: &Q) -> Result<()> {
    if *p <= q(2) || *p >= q(3) {
        return Err(Error::domain("the Itô lift needs p in (2, 3)"));
    }
    Ok(())
}

fn leaf(i: usize) -> CanonicalTree {
    CanonicalTree::leaf(i as Label + 1)
}

/// `[•_i]_j`: root `j`, one child `i` (0-based arguments).
fn cherry(i: usize, j: usize) -> CanonicalTree {
    CanonicalTree::new(j as Label + 1, vec![leaf(i)])
}

fn level_two(dx: &[Q], area: impl Fn(usize, usize) -> Q) -> ForestSeries<Q> {
    let d = dx.len();
    let mut s = ForestSeries::unit(Some(2));
    for i in 0..d {
        s.add_term(CanonicalForest::single(leaf(i)), dx[i].clone());
        for j in i..d {
            s.add_term(CanonicalForest::from_trees(vec![leaf(i), leaf(j)]), &dx[i] * &dx[j]);
        }
        for j in 0..d {
            s.add_term(CanonicalForest::single(cherry(i, j)), area(i, j));
        }
    }
    s
}

/// The Itô increment over sample indices `a..b` written out directly:
/// `•_i ↦ X^i_{s,t}`, `•_i•_j ↦ X^i_{s,t} X^j_{s,t}` and
/// `[•_i]_j ↦ Σ X^i_{s,u} ΔX^j_u` (left-point sum).
pub fn ito_increment(path: &SamplePath, a: usize, b: usize) -> Result<ForestSeries<Q>> {
    if a > b || b > path.steps() {
        return Err(Error::domain("sample indices out of range"));
    }
    let steps = path.exact_increments()?;
    let d = path.dim();
    let mut total = vec![Q::zero(); d];
    let mut area = vec![vec![Q::zero(); d]; d];
    for dx in &steps[a..b] {
        for i in 0..d {
            for j in 0..d {
                area[i][j] += &total[i] * &dx[j];
            }
        }
        for i in 0..d {
            total[i] += &dx[i];
        }
    }
    Ok(level_two(&total, |i, j| area[i][j].clone()))
}

/// Itô branched lift at level 2 on the sample grid; each step has zero
/// area, and the left-point sums appear through ⋆-concatenation.
pub fn ito_lift(path: &SamplePath, p: Q) -> Result<GridRoughPath> {
    check_ito_p(&p)?;
    path.validate()?;
    let increments = path
        .exact_increments()?
        .iter()
        .map(|dx| level_two(dx, |_, _| Q::zero()))
        .collect();
    GridRoughPath::new(path.times.clone(), increments, p, 2)
}

fn step_deltas(rp: &GridRoughPath) -> Vec<Vec<Q>> {
    let d = rp.dim() as usize;
    rp.increments
        .iter()
        .map(|x| (0..d).map(|i| x.coeff(&CanonicalForest::single(leaf(i)))).collect())
        .collect()
}

/// Generator indices of `•_i` and `[•_i]_j` (i ≤ j), checking that the
/// degree-2 generators are exactly these trees.
fn section_six_indices(basis: &GeneratorBasis, d: usize) -> Result<(Vec<u32>, Vec<Vec<u32>>)> {
    let wrong = || Error::domain("basis is not the {•_i} ∪ {[•_i]_j : i ≤ j} generator choice");
    if basis.degree_bound() < 2 || basis.labels() as usize != d || basis.counts_by_degree()[..2] != [d, d * (d + 1) / 2] {
        return Err(wrong());
    }
    let leaves = (0..d).map(|i| basis.index_of(&leaf(i)).ok_or_else(wrong)).collect::<Result<Vec<_>>>()?;
    let mut cherries = vec![vec![0; d]; d];
    for i in 0..d {
        for j in i..d {
            cherries[i][j] = basis.index_of(&cherry(i, j)).ok_or_else(wrong)?;
        }
    }
    Ok((leaves, cherries))
}

/// The Stratonovich/covariation form of `X_{t_a,t_b}` in the tensor picture:
/// words `(i)` carry `X^i`, words `(i,j)` the midpoint integral `∫X^i∘dX^j`
/// shifted by `±½[X^i,X^j]` for `i ≠ j`, and the generators `[•_i]_j` carry
/// `−[X^i,X^j]` (`i < j`) or `−½[X^i,X^i]`.
pub fn ito_to_stratonovich(rp: &GridRoughPath, a: usize, b: usize, basis: &GeneratorBasis) -> Result<TensorSeries<Q>> {
    check_ito_p(&rp.p)?;
    if a > b || b > rp.steps() {
        return Err(Error::domain("grid indices out of range"));
    }
    let d = rp.dim() as usize;
    let (leaves, cherries) = section_six_indices(basis, d)?;
    let scaling = PiScaling::from_basis(rp.p.clone(), basis)?;
    let half = qr(1, 2);
    let mut x = vec![Q::zero(); d];
    let mut strat = vec![vec![Q::zero(); d]; d];
    let mut cov = vec![vec![Q::zero(); d]; d];
    for dx in &step_deltas(rp)[a..b] {
        for i in 0..d {
            let mid = &x[i] + &half * &dx[i];
            for j in 0..d {
                strat[i][j] += &mid * &dx[j];
                cov[i][j] += &dx[i] * &dx[j];
            }
        }
        for i in 0..d {
            x[i] += &dx[i];
        }
    }
    let mut words = WordCoeffs::new();
    words.insert(Vec::new(), Q::one());
    for i in 0..d {
        words.insert(vec![leaves[i]], x[i].clone());
        for j in 0..d {
            let shift = match i.cmp(&j) {
                std::cmp::Ordering::Less => &half * &cov[i][j],
                std::cmp::Ordering::Greater => -(&half * &cov[j][i]),
                std::cmp::Ordering::Equal => Q::zero(),
            };
            words.insert(vec![leaves[i], leaves[j]], &strat[i][j] + shift);
        }
        for j in i..d {
            let w = if i == j { -(&half * &cov[i][i]) } else { -cov[i][j].clone() };
            words.insert(vec![cherries[i][j]], w);
        }
    }
    TensorSeries::from_words(words, scaling, Q::one())
}

/// Log-linear extension of a level-`level` group-like element to level `n`.
pub fn extend_increment(x: &ForestSeries<Q>, level: usize, n: usize) -> Result<ForestSeries<Q>> {
    let l = log_star(x, level)?.with_truncation(Some(n));
    exp_star(&l, n)
}

/// `ρ^n S(X)_{0,t_i}` for every grid index `i`.
pub fn signature_partials(rp: &GridRoughPath, n: usize) -> Result<Vec<ForestSeries<Q>>> {
    if n < rp.level {
        return Err(Error::domain("signature level must be at least the path level"));
    }
    let mut out = vec![ForestSeries::unit(Some(n))];
    for x in &rp.increments {
        let next = gl_product(out.last().expect("non-empty"), &extend_increment(x, rp.level, n)?);
        out.push(next);
    }
    Ok(out)
}

/// `S(X)_{0,1}` truncated at level `n`, by ⋆-concatenation of extended steps.
pub fn extend_signature(rp: &GridRoughPath, n: usize) -> Result<ForestSeries<Q>> {
    Ok(signature_partials(rp, n)?.pop().expect("non-empty"))
}

/// Extend one step in the tensor picture: `exp(log Ψ(x))` at cap `n/p`.
pub fn extend_increment_tensor(x: &ForestSeries<Q>, n: usize, basis: &GeneratorBasis, scaling: &PiScaling) -> Result<TensorSeries<Q>> {
    let cap = Q::from_integer(n.into()) / scaling.p();
    let xb = psi(x, basis, scaling)?;
    tensor_exp(&tensor_log(&xb)?.with_cap(cap))
}

/// `S(X)_{0,1}` computed as `ı S(X̄)`: extend and multiply the Ψ-images in
/// the tensor algebra, then evaluate the words as ⋆-products.
pub fn signature_via_tensor(rp: &GridRoughPath, n: usize, basis: &GeneratorBasis) -> Result<ForestSeries<Q>> {
    if basis.degree_bound() < n {
        return Err(Error::domain("basis bound is below the signature level"));
    }
    let scaling = PiScaling::from_basis(rp.p.clone(), basis)?;
    let cap = Q::from_integer(n.into()) / scaling.p();
    let mut acc = TensorSeries::unit(scaling.clone(), cap);
    for x in &rp.increments {
        acc = tensor_mul(&acc, &extend_increment_tensor(x, n, basis, &scaling)?)?;
    }
    psi_inv(&acc, basis)
}

fn exact_covariance(cov: &[Vec<Q>]) -> Result<usize> {
    let d = cov.len();
    if d == 0 || cov.iter().any(|r| r.len() != d) {
        return Err(Error::domain("covariance must be a non-empty square matrix"));
    }
    for i in 0..d {
        for j in 0..d {
            if cov[i][j] != cov[j][i] {
                return Err(Error::domain("covariance must be symmetric"));
            }
        }
    }
    // every principal minor must be non-negative
    for mask in 1u32..(1 << d) {
        let idx: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let mut m: Vec<Vec<Q>> = idx.iter().map(|&i| idx.iter().map(|&j| cov[i][j].clone()).collect()).collect();
        if Signed::is_negative(&determinant(&mut m)) {
            return Err(Error::domain("covariance is not positive semi-definite"));
        }
    }
    Ok(d)
}

fn determinant(m: &mut [Vec<Q>]) -> Q {
    let n = m.len();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for k in c..n {
                let v = &f * &m[c][k];
                m[r][k] -= v;
            }
        }
    }
    det
}

/// The degree-two element `L` with `ESig = exp_⋆(t L)` for Brownian motion
/// with covariance `Σ`, built term by term from
/// `½Σ Σ^{ij} •_i⋆•_j + ½Σ_{i<j} Σ^{ij}[•_i,•_j] − Σ_{i<j} Σ^{ij}[•_i]_j − ½Σ Σ^{ii}[•_i]_i`.
pub fn esig_bm_generator(cov: &[Vec<Q>]) -> Result<ForestSeries<Q>> {
    let d = exact_covariance(cov)?;
    let half = qr(1, 2);
    let node = |i: usize| ForestSeries::<Q>::from_tree(leaf(i), Some(2));
    let star = |i: usize, j: usize| gl_product(&node(i), &node(j));
    let mut l = ForestSeries::zero(Some(2));
    for i in 0..d {
        for j in 0..d {
            l = &l + &star(i, j).scale(&(&half * &cov[i][j]));
            if i < j {
                let bracket = &star(i, j) - &star(j, i);
                l = &l + &bracket.scale(&(&half * &cov[i][j]));
                l.add_term(CanonicalForest::single(cherry(i, j)), -cov[i][j].clone());
            }
        }
        l.add_term(CanonicalForest::single(cherry(i, i)), -(&half * &cov[i][i]));
    }
    Ok(l)
}

/// Closed-form expected signature of Brownian motion at time `t`, level `n`.
pub fn esig_bm_closed_form(cov: &[Vec<Q>], t: &Q, n: usize) -> Result<ForestSeries<Q>> {
    exp_star(&esig_bm_generator(cov)?.scale(t).with_truncation(Some(n)), n)
}

/// Monte Carlo estimate of the expected signature with per-coefficient
/// standard errors.
#[derive(Debug, Clone)]
pub struct MonteCarloEsig {
    pub mean: ForestSeries<f64>,
    pub stderr: ForestSeries<f64>,
    pub samples: usize,
}

const CHUNK: usize = 512;

/// Dense level-2 Itô step `1 + Σx^i•_i + Σ_{i≤j} x^ix^j •_i•_j`.
fn dense_step(alg: &DenseAlgebra, idx: &StepIndex, dx: &[f64]) -> Vec<f64> {
    let mut v = alg.unit();
    for (i, &xi) in dx.iter().enumerate() {
        v[idx.leaves[i]] = xi;
        for (j, &xj) in dx.iter().enumerate().skip(i) {
            v[idx.pairs[i][j]] = xi * xj;
        }
    }
    v
}

struct StepIndex {
    leaves: Vec<usize>,
    pairs: Vec<Vec<usize>>,
}

/// Float signatures of Itô-lifted Brownian paths, one ChaCha stream per
/// sample index so that any subset of samples can be drawn independently.
struct DenseBmSampler {
    alg: DenseAlgebra,
    idx: StepIndex,
    factor: DMatrix<f64>,
    dt: f64,
    steps: usize,
    seed: u64,
}

impl DenseBmSampler {
    fn new(cov: &[Vec<f64>], t: f64, n: usize, steps: usize, seed: u64) -> Result<Self> {
        if n < 2 || steps == 0 || t.is_nan() || t <= 0.0 {
            return Err(Error::domain("need level ≥ 2, at least one step and t > 0"));
        }
        let d = cov.len();
        let factor = covariance_factor(cov)?;
        let alg = DenseAlgebra::new(n, d as Label);
        let pos = |f: CanonicalForest| alg.index_of(&f).expect("forest in range");
        let idx = StepIndex {
            leaves: (0..d).map(|i| pos(CanonicalForest::single(leaf(i)))).collect(),
            pairs: (0..d)
                .map(|i| (0..d).map(|j| pos(CanonicalForest::from_trees(vec![leaf(i), leaf(j)]))).collect())
                .collect(),
        };
        Ok(DenseBmSampler {
            alg,
            idx,
            factor,
            dt: t / steps as f64,
            steps,
            seed,
        })
    }

    fn sample(&self, k: usize) -> Vec<f64> {
        let alg = &self.alg;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let mut sig = alg.unit();
        for dx in gaussian_steps(&self.factor, self.steps, self.dt, &mut rng) {
            let mut l = alg.log(&dense_step(alg, &self.idx, &dx));
            alg.project(&mut l, 2);
            sig = alg.mul(&sig, &alg.exp(&l));
        }
        sig
    }
}

/// Level-`n` signatures of `samples` independent Itô-lifted Brownian paths
/// (covariance `Σ`, horizon `t`, `steps` steps), in float arithmetic.
pub fn bm_signature_samples(cov: &[Vec<f64>], t: f64, n: usize, samples: usize, steps: usize, seed: u64) -> Result<Vec<ForestSeries<f64>>> {
    let sampler = DenseBmSampler::new(cov, t, n, steps, seed)?;
    Ok((0..samples)
        .into_par_iter()
        .map(|k| sampler.alg.to_series(&sampler.sample(k)))
        .collect())
}

/// Monte Carlo expected signature of the Itô lift of Brownian motion with
/// covariance `Σ`, over `samples` independent paths of `steps` steps each.
/// Sample `k` draws from the ChaCha stream `k` of `seed`, and partial sums
/// are combined in a fixed order, so the result does not depend on the
/// number of worker threads.
pub fn esig_bm_monte_carlo(cov: &[Vec<f64>], t: f64, n: usize, samples: usize, steps: usize, seed: u64) -> Result<MonteCarloEsig> {
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let sampler = DenseBmSampler::new(cov, t, n, steps, seed)?;
    let dim = sampler.alg.dim();
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; dim];
            let mut sq = vec![0.0; dim];
            for k in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                for (i, v) in sampler.sample(k).into_iter().enumerate() {
                    sum[i] += v;
                    sq[i] += v * v;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; dim];
    let mut sq = vec![0.0; dim];
    for (s, q2) in chunks {
        sum.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        sq.iter_mut().zip(&q2).for_each(|(a, b)| *a += b);
    }
    let nf = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let se: Vec<f64> = sq
        .iter()
        .zip(&mean)
        .map(|(s2, m)| ((s2 - nf * m * m).max(0.0) / (nf - 1.0) / nf).sqrt())
        .collect();
    Ok(MonteCarloEsig {
        mean: sampler.alg.to_series(&mean),
        stderr: sampler.alg.to_series(&se),
        samples,
    })
}

/// One row of the moment-bound table: the contribution of ⋆-words of
/// length `m` to `exp(Kγ_k)(ESig)` and the running sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub length: usize,
    pub contribution: f64,
    pub partial_sum: f64,
    pub ratio: Option<f64>,
}

/// Word-length profile of `exp(Kγ_k)` on the Brownian expected signature.
///
/// `ESig = exp_⋆(tL)` is rewritten as `exp` of the word expansion of `tL` in
/// the free word algebra, computed exactly for words up to `max_len`
/// letters; only letters `≤ k` count.
pub fn moment_bound_check(cov: &[Vec<Q>], t: &Q, big_k: f64, k: usize, max_len: usize, basis: &GeneratorBasis) -> Result<Vec<MomentRow>> {
    let l = basis.rewrite_to_words(&esig_bm_generator(cov)?.scale(t))?;
    let mul = |a: &WordCoeffs, b: &WordCoeffs| -> WordCoeffs {
        let mut out = WordCoeffs::new();
        for (u, x) in a {
            for (v, y) in b {
                if u.len() + v.len() <= max_len {
                    let mut w: Word = u.clone();
                    w.extend_from_slice(v);
                    *out.entry(w).or_insert_with(Q::zero) += x * y;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    };
    let mut total = WordCoeffs::from([(Vec::new(), Q::one())]);
    let mut power = total.clone();
    for n in 1..=max_len {
        power = mul(&power, &l);
        let inv = Q::new(1.into(), (n as i64).into());
        power.values_mut().for_each(|c| *c *= &inv);
        for (w, c) in &power {
            *total.entry(w.clone()).or_insert_with(Q::zero) += c;
        }
    }
    let mut rows: Vec<MomentRow> = Vec::new();
    let mut partial = 0.0;
    for m in 0..=max_len {
        let contribution: f64 = total
            .iter()
            .filter(|(w, _)| w.len() == m && w.iter().all(|&r| r as usize <= k))
            .map(|(_, c)| big_k.powi(m as i32) * crate::scalar::Scalar::abs_f64(c))
            .sum();
        partial += contribution;
        let ratio = rows
            .last()
            .filter(|r| r.contribution > 0.0)
            .map(|r| contribution / r.contribution);
        rows.push(MomentRow {
            length: m,
            contribution,
            partial_sum: partial,
            ratio,
        });
    }
    Ok(rows)
}

/// `sig.json`: a series in text form and its truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureJson {
    pub series: String,
    pub level: usize,
}

impl SignatureJson {
    pub fn from_series(s: &ForestSeries<Q>, level: usize) -> Self {
        SignatureJson {
            series: s.to_string(),
            level,
        }
    }

    pub fn to_series(&self) -> Result<ForestSeries<Q>> {
        let s = parse_series(&self.series, None)?;
        if s.max_degree() > self.level {
            return Err(Error::invariant(format!("signature has terms above level {}", self.level)));
        }
        Ok(s.with_truncation(Some(self.level)))
    }
}

/// `lift.json`: a grid rough path with increments in series text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftJson {
    pub p: String,
    pub level: usize,
    pub times: Vec<f64>,
    pub increments: Vec<String>,
}

impl LiftJson {
    pub fn from_rough_path(rp: &GridRoughPath) -> Self {
        LiftJson {
            p: crate::scalar::format_q(&rp.p),
            level: rp.level,
            times: rp.times.clone(),
            increments: rp.increments.iter().map(|x| x.to_string()).collect(),
        }
    }

    /// Rebuild and revalidate (grid order, group-like increments).
    pub fn to_rough_path(&self) -> Result<GridRoughPath> {
        let p = crate::scalar::parse_q(&self.p)?;
        let increments = self.increments.iter().map(|s| parse_series(s, None)).collect::<Result<_>>()?;
        GridRoughPath::new(self.times.clone(), increments, p, self.level)
    }
}
