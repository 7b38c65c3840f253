mod common;

use std::collections::BTreeMap;

use branched_core::freebasis::{GeneratorBasis, Word};
use branched_core::fourier::{evaluate_on_grouplike, unitarity_defect, Representation, C64};
use branched_core::hopf::{
    ck_coproduct, exp_star, gl_coproduct, gl_product, grouplike_check, inverse_star, is_character, log_star, pre_lie,
    seminorm_exp_k_gamma, tensor_star, unshuffle, ForestSeries, ForestTensor,
};
use branched_core::poly::{Polynomial, PolyVectorField, VectorFields};
use branched_core::rde::{branched_euler_solve, geometric_euler_solve, psi_driver, generator_fields, ElementaryDifferentials};
use branched_core::roughpath::{esig_bm_monte_carlo, extend_signature, ito_increment, ito_lift, simulate_bm, GridRoughPath};
use branched_core::scalar::{q, qr, Q};
use branched_core::tensoriso::{psi, psi_inv, rho_p_var, rho_pi_var, tensor_mul, PiScaling, TensorSeries};
use branched_core::trees::{
    enumerate_forests, enumerate_forests_upto, enumerate_trees, symmetry_factor, tree_factorial, CanonicalForest,
    CanonicalTree,
};
use num::{One, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use common::{identity, rand_q, random_driver, random_series, rng};

fn same(a: &ForestSeries<Q>, b: &ForestSeries<Q>) -> bool {
    (a - b).is_empty()
}

fn random_tree(nodes: usize, d: u32, r: &mut ChaCha8Rng) -> CanonicalTree {
    let trees = enumerate_trees(nodes, d);
    trees[r.random_range(0..trees.len())].clone()
}

/// Rebuild a tree with children in a random order at every level.
fn shuffled(t: &CanonicalTree, r: &mut ChaCha8Rng) -> CanonicalTree {
    let mut kids: Vec<CanonicalTree> = t.children().iter().map(|c| shuffled(c, r)).collect();
    kids.shuffle(r);
    CanonicalTree::new(t.label(), kids)
}

fn primitive(level: usize, d: u32, r: &mut ChaCha8Rng) -> ForestSeries<Q> {
    let trees: Vec<CanonicalForest> = enumerate_forests_upto(level, d).into_iter().filter(|f| f.as_tree().is_some()).collect();
    random_series(&trees, level, None, r)
}

fn ftensor_eq(a: &ForestTensor<Q>, b: &ForestTensor<Q>) -> bool {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter().all(|k| a.get(k).cloned().unwrap_or_else(Q::zero) == b.get(k).cloned().unwrap_or_else(Q::zero))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn canonical_form_ignores_child_order(seed in any::<u64>(), nodes in 1usize..=8) {
        let mut r = rng(seed);
        let t = random_tree(nodes, 2, &mut r);
        prop_assert_eq!(&shuffled(&t, &mut r), &t);
        prop_assert_eq!(&t.to_string().parse::<CanonicalTree>().unwrap(), &t);
        prop_assert!(tree_factorial(&t) >= One::one());
        prop_assert!(symmetry_factor(&t) >= One::one());
    }

    #[test]
    fn star_is_associative_and_graded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let forests = enumerate_forests_upto(4, 2);
        let (a, b, c) = (
            random_series(&forests, 4, None, &mut r),
            random_series(&forests, 4, None, &mut r),
            random_series(&forests, 4, None, &mut r),
        );
        prop_assert!(same(&gl_product(&gl_product(&a, &b), &c), &gl_product(&a, &gl_product(&b, &c))));
        let (m, n) = (r.random_range(0..=2), r.random_range(0..=2));
        let prod = gl_product(&a.homogeneous(m).with_truncation(None), &b.homogeneous(n).with_truncation(None));
        prop_assert!(prod.iter().all(|(f, _)| f.node_count() == m + n));
    }

    #[test]
    fn coproduct_is_multiplicative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let forests = enumerate_forests_upto(2, 2);
        let a = random_series(&forests, 2, None, &mut r).with_truncation(None);
        let b = random_series(&forests, 2, None, &mut r).with_truncation(None);
        let lhs = gl_coproduct(&gl_product(&a, &b));
        let rhs = tensor_star(&gl_coproduct(&a), &gl_coproduct(&b), None);
        prop_assert!(ftensor_eq(&lhs, &rhs));
    }

    #[test]
    fn exp_and_log_are_inverse(seed in any::<u64>(), level in 1usize..=5) {
        let mut r = rng(seed);
        let d = if level > 3 { 1 } else { 2 };
        let x = primitive(level, d, &mut r);
        let g = exp_star(&x, level).unwrap();
        prop_assert!(same(&log_star(&g, level).unwrap(), &x));
        prop_assert!(grouplike_check(&g, level));
        prop_assert!(same(&gl_product(&g, &inverse_star(&g, level).unwrap()).truncate(level), &ForestSeries::unit(Some(level))));
    }

    #[test]
    fn grouplike_elements_are_characters(seed in any::<u64>()) {
        let mut r = rng(seed);
        let level = 4;
        let g = exp_star(&primitive(level, 2, &mut r), level).unwrap();
        prop_assert!(is_character(&g, level, 2));
        let forests = enumerate_forests_upto(level, 2);
        for s1 in &forests {
            for s2 in &forests {
                if s1.node_count() + s2.node_count() <= level {
                    prop_assert_eq!(g.coeff(&s1.concat(s2)), g.coeff(s1) * g.coeff(s2));
                }
            }
        }
    }

    #[test]
    fn seminorm_is_submultiplicative(seed in any::<u64>(), big_k in 0.5f64..3.0, k in 1usize..=5) {
        let basis = GeneratorBasis::shared(3, 2).unwrap();
        let mut r = rng(seed);
        let forests = enumerate_forests_upto(3, 2);
        let a = random_series(&forests, 3, None, &mut r);
        let b = random_series(&forests, 3, None, &mut r);
        let ab = seminorm_exp_k_gamma(&gl_product(&a, &b), big_k, k, &basis).unwrap();
        let (na, nb) = (seminorm_exp_k_gamma(&a, big_k, k, &basis).unwrap(), seminorm_exp_k_gamma(&b, big_k, k, &basis).unwrap());
        prop_assert!(ab <= na * nb * (1.0 + 1e-12) + 1e-12, "{} > {} * {}", ab, na, nb);
    }

    #[test]
    fn basis_round_trip(seed in any::<u64>()) {
        let basis = GeneratorBasis::shared(4, 2).unwrap();
        let mut r = rng(seed);
        let a = random_series(&enumerate_forests_upto(4, 2), 4, None, &mut r);
        let words = basis.rewrite_to_words(&a).unwrap();
        prop_assert!(same(&basis.rewrite_to_forests(&words, Some(4)).unwrap(), &a));
    }

    #[test]
    fn psi_transfers_chen(seed in any::<u64>()) {
        let basis = GeneratorBasis::shared(2, 2).unwrap();
        let scaling = PiScaling::from_basis(qr(5, 2), &basis).unwrap();
        let mut r = rng(seed);
        let steps: Vec<ForestSeries<Q>> = (0..4).map(|_| exp_star(&primitive(2, 2, &mut r), 2).unwrap()).collect();
        let rp = GridRoughPath::new(vec![0.0, 0.25, 0.5, 0.75, 1.0], steps, qr(5, 2), 2).unwrap();
        for i in 0..=4 {
            for j in i..=4 {
                for l in j..=4 {
                    let lhs = psi(&rp.increment(i, l), &basis, &scaling).unwrap();
                    let rhs = tensor_mul(&psi(&rp.increment(i, j), &basis, &scaling).unwrap(), &psi(&rp.increment(j, l), &basis, &scaling).unwrap()).unwrap();
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn deg_pi_adds_over_concatenation(seed in any::<u64>()) {
        let basis = GeneratorBasis::shared(3, 2).unwrap();
        let scaling = PiScaling::from_basis(qr(7, 2), &basis).unwrap();
        let mut r = rng(seed);
        let k = scaling.k() as u32;
        let u: Word = (0..r.random_range(0..4)).map(|_| r.random_range(1..=k)).collect();
        let v: Word = (0..r.random_range(0..4)).map(|_| r.random_range(1..=k)).collect();
        let uv: Word = u.iter().chain(&v).copied().collect();
        prop_assert_eq!(scaling.deg_pi(&uv).unwrap(), scaling.deg_pi(&u).unwrap() + scaling.deg_pi(&v).unwrap());
    }
}

#[test]
fn coassociativity_on_basis_forests() {
    type Triple = BTreeMap<(CanonicalForest, CanonicalForest, CanonicalForest), u64>;
    for f in enumerate_forests_upto(4, 2) {
        let mut left = Triple::new();
        let mut right = Triple::new();
        for ((a, b), m) in ck_coproduct(&f) {
            for ((a1, a2), m2) in ck_coproduct(&a) {
                *left.entry((a1, a2, b.clone())).or_insert(0) += m * m2;
            }
            for ((b1, b2), m2) in ck_coproduct(&b) {
                *right.entry((a.clone(), b1, b2)).or_insert(0) += m * m2;
            }
        }
        assert_eq!(left, right, "CK coassociativity at {f}");
        let mut left = Triple::new();
        let mut right = Triple::new();
        for (a, b) in unshuffle(&f) {
            for (a1, a2) in unshuffle(&a) {
                *left.entry((a1, a2, b.clone())).or_insert(0) += 1;
            }
            for (b1, b2) in unshuffle(&b) {
                *right.entry((a.clone(), b1, b2)).or_insert(0) += 1;
            }
        }
        assert_eq!(left, right, "δ coassociativity at {f}");
    }
}

#[test]
fn coproduct_compatibility_on_basis_pairs() {
    let forests = enumerate_forests_upto(4, 2);
    for a in &forests {
        for b in &forests {
            if a.node_count() + b.node_count() > 4 {
                continue;
            }
            let (sa, sb) = (ForestSeries::from_forest(a.clone(), None), ForestSeries::from_forest(b.clone(), None));
            let lhs = gl_coproduct(&gl_product(&sa, &sb));
            let rhs = tensor_star(&gl_coproduct(&sa), &gl_coproduct(&sb), None);
            assert!(ftensor_eq(&lhs, &rhs), "δ({a} ⋆ {b})");
        }
    }
}

#[test]
fn generators_are_primitive_and_deterministic() {
    let basis = GeneratorBasis::compute(4, 2).unwrap();
    for g in basis.generators() {
        let s = ForestSeries::from_tree(g.clone(), None);
        let mut want = ForestTensor::new();
        want.insert((CanonicalForest::single(g.clone()), CanonicalForest::unit()), q(1));
        want.insert((CanonicalForest::unit(), CanonicalForest::single(g.clone())), q(1));
        assert_eq!(gl_coproduct(&s), want, "δ({g})");
    }
    assert_eq!(basis, GeneratorBasis::compute(4, 2).unwrap());
    let reloaded = GeneratorBasis::from_json(&serde_json::from_str(&serde_json::to_string(&basis.to_json()).unwrap()).unwrap()).unwrap();
    assert_eq!(basis, reloaded);
}

#[test]
fn word_evaluation_is_injective() {
    // the forests reached by words of degree ≤ n span a space of full dimension
    for (n, d) in [(5, 1), (4, 2)] {
        let basis = GeneratorBasis::compute(n, d).unwrap();
        let total: usize = (1..=n).map(|m| enumerate_forests(m, d).len()).sum::<usize>() + 1;
        assert_eq!(basis.backward_table().len(), total, "N={n} d={d}");
        for f in enumerate_forests_upto(n, d) {
            let words = basis.rewrite_to_words(&ForestSeries::from_forest(f.clone(), Some(n))).unwrap();
            assert!(same(&basis.rewrite_to_forests(&words, Some(n)).unwrap(), &ForestSeries::from_forest(f, Some(n))));
        }
    }
}

fn random_fields(e: usize, d: usize, r: &mut ChaCha8Rng) -> VectorFields {
    let poly = |r: &mut ChaCha8Rng| {
        let mut p = Polynomial::constant(e, rand_q(r));
        for _ in 0..3 {
            let mut m = Polynomial::constant(e, rand_q(r));
            for _ in 0..r.random_range(0..=2) {
                m = m.mul(&Polynomial::var(e, r.random_range(0..e)));
            }
            p = p.add(&m);
        }
        p
    };
    VectorFields::new((0..d).map(|_| PolyVectorField::new((0..e).map(|_| poly(r)).collect()).unwrap()).collect()).unwrap()
}

#[test]
fn elementary_differentials_form_a_pre_lie_morphism() {
    for seed in 0..4 {
        let mut r = rng(seed);
        let fields = random_fields(3, 2, &mut r);
        let mut table = ElementaryDifferentials::new(&fields);
        for a in 1..=3 {
            for b in 1..=4 - a {
                for tau in enumerate_trees(a, 2) {
                    for sigma in enumerate_trees(b, 2) {
                        let lhs = table.of_series(&pre_lie(&tau, &sigma)).unwrap();
                        let rhs = table.get(&tau).unwrap().pre_lie(&table.get(&sigma).unwrap());
                        assert_eq!(lhs, rhs, "seed {seed}: {tau} ↷ {sigma}");
                    }
                }
            }
        }
    }
}

#[test]
fn level_one_drivers_give_classical_euler() {
    let mut r = rng(3);
    let fields = random_fields(2, 2, &mut r);
    let basis = GeneratorBasis::shared(2, 2).unwrap();
    let dxs: Vec<Vec<Q>> = (0..6).map(|_| vec![rand_q(&mut r) / q(8), rand_q(&mut r) / q(8)]).collect();
    let steps = dxs
        .iter()
        .map(|dx| {
            let mut x = ForestSeries::unit(Some(1));
            for (i, v) in dx.iter().enumerate() {
                x.add_term(CanonicalForest::single(CanonicalTree::leaf(i as u32 + 1)), v.clone());
            }
            x
        })
        .collect();
    let times = (0..=6).map(|k| k as f64 / 6.0).collect();
    let rp = GridRoughPath::new(times, steps, qr(3, 2), 1).unwrap();
    let y0 = vec![qr(1, 2), qr(1, 3)];
    let mut want = vec![y0.clone()];
    for dx in &dxs {
        let y = want.last().unwrap().clone();
        let mut next = y.clone();
        for i in 0..2 {
            for (acc, v) in next.iter_mut().zip(fields.field(i as u32 + 1).unwrap().eval(&y)) {
                *acc += &dx[i] * v;
            }
        }
        want.push(next);
    }
    assert_eq!(branched_euler_solve(&rp, &fields, &y0).unwrap(), want);
    let driver = psi_driver(&rp, &basis).unwrap();
    let fbar = generator_fields(&basis, driver[0].scaling().k(), &fields).unwrap();
    assert_eq!(geometric_euler_solve(&driver, &fbar, &y0).unwrap(), want);
}

#[test]
fn ito_lift_satisfies_chen_and_signatures_are_grouplike() {
    let path = simulate_bm(2, 12, &identity(2), 1.0, 5).unwrap().rationalize(12);
    let rp = ito_lift(&path, qr(5, 2)).unwrap();
    assert!(rp.chen_check(|a, b| ito_increment(&path, a, b).unwrap()));
    for n in 2..=4 {
        assert!(grouplike_check(&extend_signature(&rp, n).unwrap(), n), "level {n}");
    }
}

#[test]
fn single_step_ito_area_is_zero() {
    // one exact step carries no left-point area, so ⟨X, [•₁]₁⟩ = 0 rather
    // than x²/2; on a refined grid it approaches x²/2 − x²/(2M)
    let path = branched_core::roughpath::SamplePath::new(vec![0.0, 1.0], vec![vec![0.0], vec![0.75]], "segment").unwrap();
    let x = ito_increment(&path, 0, 1).unwrap();
    let cherry = CanonicalForest::single(CanonicalTree::new(1, vec![CanonicalTree::leaf(1)]));
    assert_eq!(x.coeff(&cherry), q(0));
    let m = 8;
    let fine = branched_core::roughpath::SamplePath::new(
        (0..=m).map(|k| k as f64 / m as f64).collect(),
        (0..=m).map(|k| vec![0.75 * k as f64 / m as f64]).collect(),
        "segment",
    )
    .unwrap();
    let x = ito_increment(&fine, 0, m).unwrap();
    let v = qr(3, 4);
    assert_eq!(x.coeff(&cherry), &v * &v / q(2) - &v * &v / q(2 * m as i64));
}

#[test]
fn monte_carlo_ignores_thread_count() {
    let cov = vec![vec![1.0, 0.3], vec![0.3, 0.5]];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| esig_bm_monte_carlo(&cov, 1.0, 3, 2000, 4, 9).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn rho_variations_are_comparable() {
    // the two metrics on the same pairs of grid paths; constants are only
    // recorded, the check is that the ratio stays finite and positive
    let basis = GeneratorBasis::shared(2, 2).unwrap();
    let scaling = PiScaling::from_basis(qr(5, 2), &basis).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..50 {
        let x = random_driver(2, 5, 1000 + seed, 6);
        let y = random_driver(2, 5, 2000 + seed, 6);
        let xb: Vec<TensorSeries<Q>> = x.increments().iter().map(|s| psi(s, &basis, &scaling).unwrap()).collect();
        let yb: Vec<TensorSeries<Q>> = y.increments().iter().map(|s| psi(s, &basis, &scaling).unwrap()).collect();
        let rp = rho_p_var(x.increments(), y.increments(), 2.5).unwrap();
        let rpi = rho_pi_var(&xb, &yb).unwrap();
        assert!(rp > 0.0 && rpi > 0.0);
        lo = lo.min(rp / rpi);
        hi = hi.max(rp / rpi);
    }
    println!("ρ_p-var / ρ_Π-var over 50 pairs: [{lo:.4}, {hi:.4}]");
    assert!(lo > 0.0 && hi.is_finite());
    let x = random_driver(2, 5, 1, 6);
    assert_eq!(rho_p_var(x.increments(), x.increments(), 2.5).unwrap(), 0.0);
}

#[test]
fn word_evaluation_is_multiplicative() {
    let basis = GeneratorBasis::shared(2, 2).unwrap();
    let scaling = PiScaling::from_basis(qr(5, 2), &basis).unwrap();
    let rep = Representation::random(3, &[1, 2, 3, 4, 5], 0.7, 11).unwrap();
    let mut r = rng(12);
    let mut word_series = || {
        let terms: Vec<(Word, Q)> = (0..5)
            .map(|_| ((0..r.random_range(0..3)).map(|_| r.random_range(1..=5u32)).collect(), rand_q(&mut r)))
            .collect();
        TensorSeries::from_words(terms, scaling.clone(), q(20)).unwrap()
    };
    for _ in 0..20 {
        let (v, w) = (word_series(), word_series());
        let lhs = rep.evaluate_words(tensor_mul(&v, &w).unwrap().terms());
        let rhs = rep.evaluate_words(v.terms()) * rep.evaluate_words(w.terms());
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-9));
    }
}

#[test]
fn representations_are_unitary_and_closed_under_tensor_products() {
    let basis = GeneratorBasis::shared(3, 2).unwrap();
    let a = Representation::random(2, &[1, 2, 3], 0.8, 1).unwrap();
    let b = Representation::random(3, &[1, 2, 4], 0.8, 2).unwrap();
    let ab = a.tensor_product(&b);
    let mut r = rng(13);
    for _ in 0..10 {
        let g = exp_star(&primitive(3, 2, &mut r), 3).unwrap();
        let (ua, ub, uab) = (
            evaluate_on_grouplike(&a, &g, &basis).unwrap(),
            evaluate_on_grouplike(&b, &g, &basis).unwrap(),
            evaluate_on_grouplike(&ab, &g, &basis).unwrap(),
        );
        for u in [&ua, &ub, &uab] {
            assert!(unitarity_defect(u) < 1e-12);
        }
        for (i, j, k, l) in index_quads(2, 3) {
            let want: C64 = ua[(i, k)] * ub[(j, l)];
            assert!((uab[(i * 3 + j, k * 3 + l)] - want).norm() < 1e-9);
        }
    }
}

fn index_quads(n: usize, m: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..m {
            for k in 0..n {
                for l in 0..m {
                    out.push((i, j, k, l));
                }
            }
        }
    }
    out
}

#[test]
fn psi_round_trips_on_tensor_side() {
    let basis = GeneratorBasis::shared(2, 2).unwrap();
    let scaling = PiScaling::from_basis(qr(5, 2), &basis).unwrap();
    let mut r = rng(14);
    let forests = enumerate_forests_upto(2, 2);
    for _ in 0..50 {
        let t = psi(&random_series(&forests, 2, None, &mut r), &basis, &scaling).unwrap();
        let back = psi(&psi_inv(&t, &basis).unwrap(), &basis, &scaling).unwrap();
        assert_eq!(back, t);
    }
}
