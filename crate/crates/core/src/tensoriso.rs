//! Π-graded truncated tensor algebra over the generator space and the
//! isomorphism Ψ with the truncated forest algebra.
//!
//! A word `R = (r₁,…,r_m)` of generator indices has degree
//! `deg_Π(R) = Σ |τ_{r_i}| / p`; a [`TensorSeries`] keeps the words with
//! `deg_Π ≤ cap`.

use std::collections::BTreeMap;

use num::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freebasis::{GeneratorBasis, Word, WordCoeffs};
use crate::hopf::{gl_product, ForestSeries};
use crate::scalar::{format_q, parse_q, Scalar, Q};

/// The tuple `Π = (p/|τ₁|, …, p/|τ_k|)` with `k` the number of generators of
/// degree at most `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiScaling {
    p: Q,
    degrees: Vec<usize>,
}

impl PiScaling {
    /// Keep the leading generators whose degree is at most `p`.
    pub fn new(p: Q, generator_degrees: &[usize]) -> Result<Self> {
        if p < Q::one() {
            return Err(Error::domain("p must be at least 1"));
        }
        if generator_degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("generator degrees must be non-decreasing"));
        }
        let degrees = generator_degrees
            .iter()
            .copied()
            .take_while(|&g| g >= 1 && Q::from_integer(g.into()) <= p)
            .collect();
        Ok(PiScaling { p, degrees })
    }

    pub fn from_basis(p: Q, basis: &GeneratorBasis) -> Result<Self> {
        let s = Self::new(p, &basis.generator_degrees())?;
        if basis.degree_bound() < s.floor_p() {
            return Err(Error::domain(format!(
                "basis bound {} does not cover ⌊p⌋ = {}",
                basis.degree_bound(),
                s.floor_p()
            )));
        }
        Ok(s)
    }

    pub fn p(&self) -> &Q {
        &self.p
    }

    pub fn floor_p(&self) -> usize {
        self.p.floor().to_integer().to_usize().unwrap_or(usize::MAX)
    }

    pub fn k(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// `p_j = p / |τ_j|`, 1-based.
    pub fn p_j(&self, j: u32) -> Result<Q> {
        Ok(&self.p / Q::from_integer(self.degree(j)?.into()))
    }

    fn degree(&self, j: u32) -> Result<usize> {
        (j as usize)
            .checked_sub(1)
            .and_then(|i| self.degrees.get(i).copied())
            .ok_or_else(|| Error::domain(format!("generator index {j} outside 1..={}", self.k())))
    }

    /// Sum of generator degrees along the word.
    pub fn node_degree(&self, w: &[u32]) -> Result<usize> {
        w.iter().map(|&r| self.degree(r)).sum()
    }

    pub fn deg_pi(&self, w: &[u32]) -> Result<Q> {
        Ok(Q::from_integer(self.node_degree(w)?.into()) / &self.p)
    }

    /// Largest node degree `n` with `n / p ≤ cap`.
    pub fn node_cap(&self, cap: &Q) -> usize {
        (cap * &self.p).floor().to_integer().to_usize().unwrap_or(0)
    }
}

/// All words with `deg_Π ≤ s`, ordered by length and then lexicographically.
pub fn enumerate_a_pi(s: &Q, scaling: &PiScaling) -> Vec<Word> {
    let cap = scaling.node_cap(s);
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(Word, usize)> = vec![(Vec::new(), 0)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (w, deg) in &frontier {
            for (j, &dj) in scaling.degrees().iter().enumerate() {
                if deg + dj <= cap {
                    let mut v = w.clone();
                    v.push(j as u32 + 1);
                    next.push((v, deg + dj));
                }
            }
        }
        out.extend(next.iter().map(|(w, _)| w.clone()));
        frontier = next;
    }
    out
}

/// Element of `T^(Π,s)(B_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSeries<S = Q> {
    terms: BTreeMap<Word, S>,
    scaling: PiScaling,
    cap: Q,
}

impl<S: Scalar> TensorSeries<S> {
    pub fn zero(scaling: PiScaling, cap: Q) -> Self {
        TensorSeries {
            terms: BTreeMap::new(),
            scaling,
            cap,
        }
    }

    pub fn unit(scaling: PiScaling, cap: Q) -> Self {
        let mut t = Self::zero(scaling, cap);
        t.add_term(Vec::new(), S::one());
        t
    }

    /// Build from word coefficients; words above the cap are dropped and
    /// words with unknown letters are rejected.
    pub fn from_words<I: IntoIterator<Item = (Word, S)>>(terms: I, scaling: PiScaling, cap: Q) -> Result<Self> {
        let mut t = Self::zero(scaling, cap);
        for (w, c) in terms {
            t.scaling.node_degree(&w)?;
            t.add_term(w, c);
        }
        Ok(t)
    }

    fn fits(&self, w: &[u32]) -> bool {
        self.scaling
            .node_degree(w)
            .map(|n| Q::from_integer(n.into()) <= &self.cap * self.scaling.p())
            .unwrap_or(false)
    }

    /// Add `c·w`; words above the cap or with unknown letters are ignored.
    pub fn add_term(&mut self, w: Word, c: S) {
        if c.is_zero() || !self.fits(&w) {
            return;
        }
        let v = self.terms.remove(&w).map(|v| v + c.clone()).unwrap_or(c);
        if !v.is_zero() {
            self.terms.insert(w, v);
        }
    }

    pub fn coeff(&self, w: &[u32]) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> &BTreeMap<Word, S> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaling(&self) -> &PiScaling {
        &self.scaling
    }

    pub fn cap(&self) -> &Q {
        &self.cap
    }

    /// Same terms under a different cap.
    pub fn with_cap(&self, cap: Q) -> Self {
        let mut t = Self::zero(self.scaling.clone(), cap);
        for (w, c) in self.iter() {
            t.add_term(w.clone(), c.clone());
        }
        t
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut t = Self::zero(self.scaling.clone(), self.cap.clone());
        for (w, v) in self.iter() {
            t.add_term(w.clone(), v.clone() * c.clone());
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut t = self.clone();
        for (w, c) in other.iter() {
            t.add_term(w.clone(), c.clone());
        }
        Ok(t)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.scaling != other.scaling || self.cap != other.cap {
            return Err(Error::domain("tensor series have different scalings or caps"));
        }
        Ok(())
    }

    pub fn near(&self, other: &Self) -> bool {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .all(|w| self.coeff(w).near(&other.coeff(w)))
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TensorSeries<T> {
        let mut t = TensorSeries::zero(self.scaling.clone(), self.cap.clone());
        for (w, c) in self.iter() {
            t.add_term(w.clone(), f(c));
        }
        t
    }

    /// Word length component.
    pub fn length_component(&self, m: usize) -> Self {
        let mut t = Self::zero(self.scaling.clone(), self.cap.clone());
        for (w, c) in self.iter().filter(|(w, _)| w.len() == m) {
            t.add_term(w.clone(), c.clone());
        }
        t
    }

    fn max_word_len(&self) -> usize {
        let min_deg = self.scaling.degrees().first().copied().unwrap_or(1).max(1);
        self.scaling.node_cap(&self.cap) / min_deg
    }
}

/// Concatenation product, truncated at the common cap.
pub fn tensor_mul<S: Scalar>(a: &TensorSeries<S>, b: &TensorSeries<S>) -> Result<TensorSeries<S>> {
    a.check_compatible(b)?;
    let mut out = TensorSeries::zero(a.scaling.clone(), a.cap.clone());
    let node_cap = a.scaling.node_cap(&a.cap);
    let bdeg: Vec<(usize, &Word, &S)> = b
        .iter()
        .map(|(w, c)| (a.scaling.node_degree(w).unwrap_or(usize::MAX), w, c))
        .collect();
    for (wa, ca) in a.iter() {
        let da = a.scaling.node_degree(wa)?;
        for (db, wb, cb) in &bdeg {
            if da + db <= node_cap {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                out.add_term(w, ca.clone() * (*cb).clone());
            }
        }
    }
    Ok(out)
}

/// Truncated tensor exponential of an element with zero constant term.
pub fn tensor_exp<S: Scalar>(x: &TensorSeries<S>) -> Result<TensorSeries<S>> {
    if !x.coeff(&[]).is_zero() {
        return Err(Error::domain("tensor_exp needs a zero constant term"));
    }
    let mut out = TensorSeries::unit(x.scaling.clone(), x.cap.clone());
    let mut power = out.clone();
    for n in 1..=x.max_word_len() {
        power = tensor_mul(&power, x)?.scale(&(S::one() / S::from_i64(n as i64)));
        if power.is_empty() {
            break;
        }
        out = out.add(&power)?;
    }
    Ok(out)
}

/// Truncated tensor logarithm of an element with constant term one.
pub fn tensor_log<S: Scalar>(g: &TensorSeries<S>) -> Result<TensorSeries<S>> {
    if g.coeff(&[]) != S::one() {
        return Err(Error::domain("tensor_log needs constant term 1"));
    }
    let x = g.sub(&TensorSeries::unit(g.scaling.clone(), g.cap.clone()))?;
    let mut out = TensorSeries::zero(g.scaling.clone(), g.cap.clone());
    let mut power = TensorSeries::unit(g.scaling.clone(), g.cap.clone());
    for n in 1..=g.max_word_len() {
        power = tensor_mul(&power, &x)?;
        if power.is_empty() {
            break;
        }
        let sign = if n % 2 == 1 { S::one() } else { -S::one() };
        out = out.add(&power.scale(&(sign / S::from_i64(n as i64))))?;
    }
    Ok(out)
}

/// `a` written in ⋆-words and read as a tensor series with the given cap.
pub fn psi_with_cap(a: &ForestSeries<Q>, basis: &GeneratorBasis, scaling: &PiScaling, cap: Q) -> Result<TensorSeries<Q>> {
    let limit = scaling.node_cap(&cap);
    if a.max_degree() > limit {
        return Err(Error::domain(format!(
            "series of degree {} exceeds the cap (node degree {limit})",
            a.max_degree()
        )));
    }
    let words = basis.rewrite_to_words(a)?;
    TensorSeries::from_words(words, scaling.clone(), cap)
}

/// Ψ: forests of degree at most ⌊p⌋ to `T^(Π,1)(B_k)`.
pub fn psi(a: &ForestSeries<Q>, basis: &GeneratorBasis, scaling: &PiScaling) -> Result<TensorSeries<Q>> {
    psi_with_cap(a, basis, scaling, Q::one())
}

/// Evaluate words as ⋆-products; the result is truncated at node degree
/// `⌊cap·p⌋`.
pub fn psi_inv(t: &TensorSeries<Q>, basis: &GeneratorBasis) -> Result<ForestSeries<Q>> {
    let n = t.scaling.node_cap(&t.cap);
    if n > basis.degree_bound() {
        return Err(Error::domain(format!(
            "cap needs forests up to degree {n}, basis covers {}",
            basis.degree_bound()
        )));
    }
    let words: WordCoeffs = t.terms.clone();
    basis.rewrite_to_forests(&words, Some(n))
}

/// Left-normed bracket expansion `[[…[w₁,w₂],…],w_m]` as a word combination.
fn dynkin(w: &[u32]) -> BTreeMap<Word, i64> {
    let mut acc: BTreeMap<Word, i64> = BTreeMap::new();
    if w.is_empty() {
        return acc;
    }
    acc.insert(vec![w[0]], 1);
    for &letter in &w[1..] {
        let mut next = BTreeMap::new();
        for (u, c) in acc {
            let mut right = u.clone();
            right.push(letter);
            *next.entry(right).or_insert(0) += c;
            let mut left = vec![letter];
            left.extend_from_slice(&u);
            *next.entry(left).or_insert(0) -= c;
        }
        next.retain(|_, c| *c != 0);
        acc = next;
    }
    acc
}

/// Whether a length-homogeneous combination `x` of words of length `m` is a
/// Lie element, via the Dynkin–Specht–Wever criterion `D(x) = m·x`.
fn is_lie_component<S: Scalar>(x: &TensorSeries<S>, m: usize) -> bool {
    let mut dx: BTreeMap<Word, S> = BTreeMap::new();
    for (w, c) in x.iter() {
        for (u, k) in dynkin(w) {
            let e = dx.entry(u).or_insert_with(S::zero);
            *e = e.clone() + c.clone() * S::from_i64(k);
        }
    }
    let m = S::from_i64(m as i64);
    dx.keys()
        .chain(x.terms.keys())
        .all(|w| dx.get(w).cloned().unwrap_or_else(S::zero).near(&(x.coeff(w) * m.clone())))
}

/// `g` lies in the truncated group `G^(Π,s)`: its logarithm is a Lie series.
pub fn grouplike_tensor_check<S: Scalar>(g: &TensorSeries<S>) -> Result<bool> {
    if g.coeff(&[]).is_zero() {
        return Err(Error::domain("zero constant term"));
    }
    if !g.coeff(&[]).near(&S::one()) {
        return Ok(false);
    }
    let mut g = g.clone();
    g.terms.insert(Vec::new(), S::one());
    let l = tensor_log(&g)?;
    Ok((1..=g.max_word_len()).all(|m| is_lie_component(&l.length_component(m), m)))
}

/// Largest `Σ φ(t_i, t_{i+1})^q` over sub-partitions of the grid `0..=m`.
pub fn partition_sup(m: usize, q: f64, phi: impl Fn(usize, usize) -> f64) -> f64 {
    let mut best = vec![0.0f64; m + 1];
    for j in 1..=m {
        best[j] = (0..j)
            .map(|i| best[i] + phi(i, j).powf(q))
            .fold(f64::NEG_INFINITY, f64::max);
    }
    best[m]
}

/// All grid increments `X_{t_i,t_j}` (`i ≤ j`) from consecutive ones.
fn pairwise<T: Clone>(steps: &[T], unit: T, mul: impl Fn(&T, &T) -> Result<T>) -> Result<Vec<Vec<T>>> {
    let m = steps.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let mut row = Vec::with_capacity(m + 1);
        for _ in 0..i {
            row.push(unit.clone());
        }
        let mut acc = unit.clone();
        row.push(acc.clone());
        for step in &steps[i..] {
            acc = mul(&acc, step)?;
            row.push(acc.clone());
        }
        out.push(row);
    }
    Ok(out)
}

fn check_grid<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::domain("grids must be non-empty and of equal length"));
    }
    Ok(())
}

/// `ρ_{p-var}` between two branched paths given by consecutive increments:
/// `max_{n ≤ ⌊p⌋} sup_D (Σ |π^n(X_{s,t} − Y_{s,t})|^{p/n})^{n/p}` with the
/// Euclidean norm in the forest basis.
pub fn rho_p_var(x: &[ForestSeries<Q>], y: &[ForestSeries<Q>], p: f64) -> Result<f64> {
    check_grid(x, y)?;
    let level = p.floor() as usize;
    let unit = ForestSeries::unit(Some(level));
    let mul = |a: &ForestSeries<Q>, b: &ForestSeries<Q>| Ok(gl_product(a, b).truncate(level));
    let xs = pairwise(x, unit.clone(), mul)?;
    let ys = pairwise(y, unit, mul)?;
    let m = x.len();
    let mut out = 0.0f64;
    for n in 1..=level {
        let diff = |i: usize, j: usize| (&xs[i][j] - &ys[i][j]).homogeneous(n).norm();
        let q = p / n as f64;
        out = out.max(partition_sup(m, q, diff).powf(1.0 / q));
    }
    Ok(out)
}

/// `ρ_{Π-var}` between two Π-rough paths given by consecutive increments:
/// `max_R sup_D (Σ |π_R(X̄_{s,t} − Ȳ_{s,t})|^{1/deg_Π R})^{deg_Π R}`.
pub fn rho_pi_var(x: &[TensorSeries<Q>], y: &[TensorSeries<Q>]) -> Result<f64> {
    check_grid(x, y)?;
    let scaling = x[0].scaling.clone();
    let cap = x[0].cap.clone();
    let unit = TensorSeries::unit(scaling.clone(), cap.clone());
    let xs = pairwise(x, unit.clone(), |a, b| tensor_mul(a, b))?;
    let ys = pairwise(y, unit, |a, b| tensor_mul(a, b))?;
    let m = x.len();
    let mut out = 0.0f64;
    for w in enumerate_a_pi(&cap, &scaling).into_iter().skip(1) {
        let deg = Scalar::to_f64(&scaling.deg_pi(&w)?);
        let diff = |i: usize, j: usize| Scalar::abs_f64(&(xs[i][j].coeff(&w) - ys[i][j].coeff(&w)));
        out = out.max(partition_sup(m, 1.0 / deg, diff).powf(deg));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ScalingJson {
    pub p: String,
    pub degrees: Vec<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct WordTermJson {
    pub word: Word,
    pub coeff: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TensorJson {
    pub scaling: ScalingJson,
    pub cap: String,
    pub terms: Vec<WordTermJson>,
}

impl<S: Scalar> TensorSeries<S> {
    pub fn to_json(&self) -> TensorJson {
        TensorJson {
            scaling: ScalingJson {
                p: format_q(&self.scaling.p),
                degrees: self.scaling.degrees.clone(),
            },
            cap: format_q(&self.cap),
            terms: self
                .iter()
                .map(|(w, c)| WordTermJson {
                    word: w.clone(),
                    coeff: c.fmt_coeff(),
                })
                .collect(),
        }
    }
}

impl TensorJson {
    /// Rebuild, rejecting words outside `𝒜^s_Π` rather than dropping them.
    pub fn to_series(&self) -> Result<TensorSeries<Q>> {
        let scaling = PiScaling::new(parse_q(&self.scaling.p)?, &self.scaling.degrees)?;
        if scaling.k() != self.scaling.degrees.len() {
            return Err(Error::invariant("scaling lists generators of degree above p"));
        }
        let cap = parse_q(&self.cap)?;
        if Signed::is_negative(&cap) {
            return Err(Error::invariant("negative cap"));
        }
        let mut t = TensorSeries::zero(scaling, cap);
        for term in &self.terms {
            if !t.fits(&term.word) {
                return Err(Error::invariant(format!("word {:?} lies outside the cap", term.word)));
            }
            t.add_term(term.word.clone(), parse_q(&term.coeff)?);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qr};

    fn scaling_d2() -> PiScaling {
        PiScaling::new(qr(5, 2), &[1, 1, 2, 2, 2, 3, 3]).unwrap()
    }

    #[test]
    fn degrees_and_words() {
        let s = PiScaling::new(qr(5, 2), &[1, 2, 3]).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.deg_pi(&[]).unwrap(), q(0));
        assert_eq!(s.deg_pi(&[1, 1]).unwrap(), qr(4, 5));
        assert_eq!(s.deg_pi(&[2]).unwrap(), qr(4, 5));
        assert!(s.deg_pi(&[3]).is_err());
        assert_eq!(enumerate_a_pi(&q(1), &s), vec![vec![], vec![1], vec![2], vec![1, 1]]);
        assert_eq!(enumerate_a_pi(&q(0), &s), vec![Vec::<u32>::new()]);
        assert_eq!(enumerate_a_pi(&q(1), &scaling_d2()).len(), 10);
    }

    #[test]
    fn multiplication_and_exp_log() {
        let s = scaling_d2();
        let a = TensorSeries::from_words([(vec![1], q(1))], s.clone(), q(1)).unwrap();
        let b = TensorSeries::from_words([(vec![2], q(1))], s.clone(), q(1)).unwrap();
        let ab = tensor_mul(&a, &b).unwrap();
        assert_eq!(ab.terms().keys().collect::<Vec<_>>(), [&vec![1, 2]]);
        let x = TensorSeries::from_words([(vec![1], qr(1, 3)), (vec![2], q(2)), (vec![4], qr(-1, 2))], s, q(2)).unwrap();
        let g = tensor_exp(&x).unwrap();
        assert_eq!(tensor_log(&g).unwrap(), x);
        assert!(grouplike_tensor_check(&g).unwrap());
    }

    #[test]
    fn lie_test_rejects_symmetric_parts() {
        let s = scaling_d2();
        let lie = TensorSeries::from_words([(vec![1, 2], q(1)), (vec![2, 1], q(-1))], s.clone(), q(1)).unwrap();
        assert!(grouplike_tensor_check(&tensor_exp(&lie).unwrap()).unwrap());
        let sym = TensorSeries::from_words([(vec![1, 2], q(1)), (vec![2, 1], q(1))], s, q(1)).unwrap();
        assert!(!grouplike_tensor_check(&tensor_exp(&sym).unwrap()).unwrap());
    }

    #[test]
    fn partition_dp() {
        // all-singleton partitions maximise Σ φ^q for additive φ and q ≥ 1
        let v = partition_sup(4, 2.0, |i, j| (j - i) as f64);
        assert_eq!(v, 16.0);
        let v = partition_sup(4, 0.5, |i, j| (j - i) as f64);
        assert_eq!(v, 4.0);
    }

    #[test]
    fn json_round_trip() {
        let t = TensorSeries::from_words([(vec![1, 2], qr(3, 7)), (vec![3], q(-1))], scaling_d2(), q(1)).unwrap();
        let back = t.to_json().to_series().unwrap();
        assert_eq!(back, t);
        let mut j = t.to_json();
        j.terms.push(WordTermJson { word: vec![3, 3], coeff: "1".into() });
        assert!(j.to_series().is_err());
    }
}
