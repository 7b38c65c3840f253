//! Grossman–Larson structure on the span of forests.
//!
//! * ⋆ is the transpose of the Connes–Kreimer coproduct with respect to the
//!   pairing in which forests are orthonormal; in particular
//!   `•_i ⋆ •_i = 2 •_i•_i + [•_i]_i`.
//! * δ is dual to forest concatenation: it splits a forest into two
//!   sub-multisets, each split counted once.

mod cuts;
mod dense;
pub mod graft;
mod series;
mod text;

use std::collections::BTreeMap;

pub use cuts::{ck_coproduct, single_cuts, Coproduct};
pub use dense::DenseAlgebra;
pub use series::ForestSeries;
pub use text::{parse_forest_or_series, parse_series, SeriesJson, TermJson};

pub(crate) use series::{min_trunc, within};

use crate::error::{Error, Result};
use crate::freebasis::GeneratorBasis;
use crate::scalar::{Scalar, Q};
use crate::trees::{CanonicalForest, CanonicalTree};

/// `(left, right) -> coefficient`, an element of H ⊗ H.
pub type ForestTensor<S> = BTreeMap<(CanonicalForest, CanonicalForest), S>;

/// Product of two basis forests, truncated at `trunc`.
pub fn star_forests<S: Scalar>(
    a: &CanonicalForest,
    b: &CanonicalForest,
    trunc: Option<usize>,
) -> ForestSeries<S> {
    let mut out = ForestSeries::zero(trunc);
    accumulate_star(&mut out, a, b, &S::one());
    out
}

fn accumulate_star<S: Scalar>(out: &mut ForestSeries<S>, a: &CanonicalForest, b: &CanonicalForest, c: &S) {
    let n = a.node_count() + b.node_count();
    if !within(out.truncation(), n) {
        return;
    }
    if a.is_unit() {
        out.add_term(b.clone(), c.clone());
    } else if b.is_unit() {
        out.add_term(a.clone(), c.clone());
    } else {
        let d = a.max_label().max(b.max_label());
        let table = cuts::product_table(n, d);
        for (rho, m) in table.get(a, b) {
            out.add_term(rho.clone(), S::from_i64(*m as i64) * c.clone());
        }
    }
}

/// The Grossman–Larson product `a ⋆ b`, truncated at the lower of the two
/// truncation levels. Out-of-range pairs are skipped before multiplying.
pub fn gl_product<S: Scalar>(a: &ForestSeries<S>, b: &ForestSeries<S>) -> ForestSeries<S> {
    let trunc = min_trunc(a.truncation(), b.truncation());
    let mut out = ForestSeries::zero(trunc);
    for (fa, ca) in a.iter() {
        for (fb, cb) in b.iter() {
            accumulate_star(&mut out, fa, fb, &(ca.clone() * cb.clone()));
        }
    }
    out
}

/// All splits of a forest into two sub-multisets (each split once).
pub fn unshuffle(f: &CanonicalForest) -> Vec<(CanonicalForest, CanonicalForest)> {
    let classes = f.tree_classes();
    let mut out = Vec::new();
    let mut counts = vec![0usize; classes.len()];
    loop {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for ((t, m), &k) in classes.iter().zip(&counts) {
            left.extend(std::iter::repeat_n((*t).clone(), k));
            right.extend(std::iter::repeat_n((*t).clone(), m - k));
        }
        out.push((CanonicalForest::from_trees(left), CanonicalForest::from_trees(right)));
        let mut i = 0;
        loop {
            if i == classes.len() {
                return out;
            }
            counts[i] += 1;
            if counts[i] <= classes[i].1 {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// The coproduct δ.
pub fn gl_coproduct<S: Scalar>(a: &ForestSeries<S>) -> ForestTensor<S> {
    let mut out: ForestTensor<S> = BTreeMap::new();
    for (f, c) in a.iter() {
        for pair in unshuffle(f) {
            add_tensor_term(&mut out, pair, c.clone());
        }
    }
    out
}

pub(crate) fn add_tensor_term<S: Scalar>(t: &mut ForestTensor<S>, key: (CanonicalForest, CanonicalForest), c: S) {
    if c.is_zero() {
        return;
    }
    let v = t.remove(&key).map(|v| v + c.clone()).unwrap_or(c);
    if !v.is_zero() {
        t.insert(key, v);
    }
}

/// `a ⊗ b`, keeping pairs whose total degree is within `trunc`.
pub fn tensor_of<S: Scalar>(a: &ForestSeries<S>, b: &ForestSeries<S>, trunc: Option<usize>) -> ForestTensor<S> {
    let mut out = BTreeMap::new();
    for (fa, ca) in a.iter() {
        for (fb, cb) in b.iter() {
            if within(trunc, fa.node_count() + fb.node_count()) {
                add_tensor_term(&mut out, (fa.clone(), fb.clone()), ca.clone() * cb.clone());
            }
        }
    }
    out
}

/// Componentwise product on H ⊗ H, keeping total degree within `trunc`.
pub fn tensor_star<S: Scalar>(x: &ForestTensor<S>, y: &ForestTensor<S>, trunc: Option<usize>) -> ForestTensor<S> {
    let mut out = BTreeMap::new();
    for ((l1, r1), c1) in x {
        for ((l2, r2), c2) in y {
            let total = l1.node_count() + r1.node_count() + l2.node_count() + r2.node_count();
            if !within(trunc, total) {
                continue;
            }
            let left: ForestSeries<S> = star_forests(l1, l2, None);
            let right: ForestSeries<S> = star_forests(r1, r2, None);
            let c = c1.clone() * c2.clone();
            for (lf, lc) in left.iter() {
                for (rf, rc) in right.iter() {
                    add_tensor_term(&mut out, (lf.clone(), rf.clone()), c.clone() * lc.clone() * rc.clone());
                }
            }
        }
    }
    out
}

/// Pre-Lie product `τ ↷ σ`: the single-tree part of `τ ⋆ σ`.
pub fn pre_lie(tau: &CanonicalTree, sigma: &CanonicalTree) -> ForestSeries<Q> {
    let a = CanonicalForest::single(tau.clone());
    let b = CanonicalForest::single(sigma.clone());
    star_forests::<Q>(&a, &b, None).trees_part()
}

/// Truncated ⋆-exponential of an element with zero unit coefficient.
pub fn exp_star<S: Scalar>(a: &ForestSeries<S>, level: usize) -> Result<ForestSeries<S>> {
    if !a.unit_coeff().is_zero() {
        return Err(Error::domain("exp_star needs a zero coefficient on the unit forest"));
    }
    let x = a.truncate(level);
    let mut out = ForestSeries::unit(Some(level));
    let mut power = ForestSeries::unit(Some(level));
    for n in 1..=level {
        power = gl_product(&power, &x).scale(&(S::one() / S::from_i64(n as i64)));
        if power.is_empty() {
            break;
        }
        out = &out + &power;
    }
    Ok(out)
}

/// Truncated ⋆-logarithm of an element with unit coefficient one.
pub fn log_star<S: Scalar>(g: &ForestSeries<S>, level: usize) -> Result<ForestSeries<S>> {
    if g.unit_coeff() != S::one() {
        return Err(Error::domain("log_star needs unit coefficient 1"));
    }
    let x = &g.truncate(level) - &ForestSeries::unit(Some(level));
    let mut out = ForestSeries::zero(Some(level));
    let mut power = ForestSeries::unit(Some(level));
    for n in 1..=level {
        power = gl_product(&power, &x);
        if power.is_empty() {
            break;
        }
        let sign = if n % 2 == 1 { S::one() } else { -S::one() };
        out = &out + &power.scale(&(sign / S::from_i64(n as i64)));
    }
    Ok(out)
}

/// ⋆-inverse of an element with unit coefficient one (Neumann series).
pub fn inverse_star<S: Scalar>(g: &ForestSeries<S>, level: usize) -> Result<ForestSeries<S>> {
    if g.unit_coeff() != S::one() {
        return Err(Error::domain("inverse_star needs unit coefficient 1"));
    }
    let x = &ForestSeries::unit(Some(level)) - &g.truncate(level);
    let mut out = ForestSeries::unit(Some(level));
    let mut power = ForestSeries::unit(Some(level));
    for _ in 1..=level {
        power = gl_product(&power, &x);
        if power.is_empty() {
            break;
        }
        out = &out + &power;
    }
    Ok(out)
}

/// `δ(g) = g ⊗ g` at truncation `level`, together with `⟨g, 𝟏⟩ = 1`.
pub fn grouplike_check<S: Scalar>(g: &ForestSeries<S>, level: usize) -> bool {
    if !g.unit_coeff().near(&S::one()) {
        return false;
    }
    let g = g.truncate(level);
    let lhs = gl_coproduct(&g);
    let rhs = tensor_of(&g, &g, Some(level));
    let zero = S::zero();
    lhs.keys()
        .chain(rhs.keys())
        .all(|k| lhs.get(k).unwrap_or(&zero).near(rhs.get(k).unwrap_or(&zero)))
}

/// Character property: `⟨g, σ₁σ₂⟩ = ⟨g, σ₁⟩⟨g, σ₂⟩` for all forest pairs over
/// labels `1..=d` within `level`.
pub fn is_character<S: Scalar>(g: &ForestSeries<S>, level: usize, d: crate::trees::Label) -> bool {
    let forests = crate::trees::enumerate_forests_upto(level, d);
    for a in &forests {
        for b in &forests {
            if a.node_count() + b.node_count() > level {
                continue;
            }
            let lhs = g.coeff(&a.concat(b));
            let rhs = g.coeff(a) * g.coeff(b);
            if !lhs.near(&rhs) {
                return false;
            }
        }
    }
    g.unit_coeff().near(&S::one())
}

/// The sub-multiplicative seminorm `exp(Kγ_k)`: rewrite in ⋆-words of the
/// generators and sum `K^m |λ_R|` over words whose letters are all `≤ k`.
pub fn seminorm_exp_k_gamma(a: &ForestSeries<Q>, big_k: f64, k: usize, basis: &GeneratorBasis) -> Result<f64> {
    let words = basis.rewrite_to_words(a)?;
    Ok(words
        .iter()
        .filter(|(w, _)| w.iter().all(|&r| (r as usize) <= k))
        .map(|(w, c)| big_k.powi(w.len() as i32) * c.abs_f64())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qr};
    use crate::trees::{forest, tree};

    fn s(text: &str, n: Option<usize>) -> ForestSeries<Q> {
        parse_series(text, n).unwrap()
    }

    #[test]
    fn basic_identity() {
        let a = ForestSeries::from_forest(forest("1"), None);
        let b = ForestSeries::from_forest(forest("2"), None);
        assert_eq!(gl_product(&a, &b), s("1*1 2 + 1*2[1]", None));
        assert_eq!(gl_product(&a, &a), s("2*1 1 + 1*1[1]", None));
        assert_eq!(gl_product(&ForestSeries::unit(None), &a), a);
    }

    #[test]
    fn coproduct_examples() {
        let d = gl_coproduct(&s("1*1", None));
        assert_eq!(d.len(), 2);
        let d = gl_coproduct(&s("1*1 2", None));
        assert_eq!(d.len(), 4);
        assert_eq!(d[&(forest("1"), forest("2"))], q(1));
        assert_eq!(d[&(forest("2"), forest("1"))], q(1));
        let d = gl_coproduct(&s("1*1 1", None));
        assert_eq!(d[&(forest("1"), forest("1"))], q(1));
    }

    #[test]
    fn pre_lie_examples() {
        assert_eq!(pre_lie(&tree("1"), &tree("2")), s("1*2[1]", None));
        assert_eq!(pre_lie(&tree("1"), &tree("1")), s("1*1[1]", None));
        // two single cuts of 1[1,1] give branch • and trunk 1[1]
        assert_eq!(pre_lie(&tree("1"), &tree("1[1]")), s("2*1[1,1] + 1*1[1[1]]", None));
    }

    #[test]
    fn exp_log_examples() {
        assert_eq!(exp_star(&ForestSeries::<Q>::zero(None), 3).unwrap(), ForestSeries::unit(Some(3)));
        let x = s("3/2*1", None);
        let e = exp_star(&x, 2).unwrap();
        assert_eq!(e, s("1 + 3/2*1 + 9/4*1 1 + 9/8*1[1]", Some(2)));
        for n in 1..=5 {
            assert_eq!(log_star(&exp_star(&x, n).unwrap(), n).unwrap(), x.truncate(n));
        }
        assert!(exp_star(&s("1", None), 2).is_err());
        assert!(log_star(&s("2", None), 2).is_err());
    }

    #[test]
    fn grouplike_examples() {
        assert!(grouplike_check(&ForestSeries::<Q>::unit(Some(3)), 3));
        let g = exp_star(&s("1*1 + 3*1[2]", None), 3).unwrap();
        assert!(grouplike_check(&g, 3));
        assert!(is_character(&g, 3, 2));
        // ⟨g, ••⟩ = ⟨g, •⟩² makes this one group-like: it is exp(• − ½[•])
        assert!(grouplike_check(&s("1 + 1*1 + 1*1 1", Some(2)), 2));
        assert!(!grouplike_check(&s("1 + 1*1 + 2*1 1", Some(2)), 2));
        assert!(!grouplike_check(&s("1 + 1*1 + 1*1 2", Some(2)), 2));
        let inv = inverse_star(&g, 3).unwrap();
        assert_eq!(gl_product(&g, &inv), ForestSeries::unit(Some(3)));
        let _ = qr(1, 2);
    }
}
