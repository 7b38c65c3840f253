//! Free generators of the ⋆-algebra and the change of basis between forests
//! and ⋆-words in those generators.
//!
//! Generators are chosen degree by degree. At degree `n` the ⋆-words of total
//! degree `n` in the generators found so far are inserted into an exact
//! echelon form over the forests of degree `n`; trees are then scanned in
//! canonical order and every tree outside the current span becomes a new
//! generator. Because trees span the degree-`n` forests modulo decomposable
//! elements, the scan always completes the basis; if it ever did not, the
//! construction stops with [`Error::BasisAnomaly`].

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopf::{gl_product, parse_series, ForestSeries};
use crate::linalg::{Echelon, SparseVec};
use crate::scalar::{format_q, parse_q, Q};
use crate::trees::{enumerate_forests, enumerate_trees, CanonicalForest, CanonicalTree, Label};

/// A ⋆-word `τ_{r₁} ⋆ … ⋆ τ_{r_m}`, stored as 1-based generator indices.
pub type Word = Vec<u32>;

/// Coefficients of an element written in the ⋆-word basis.
pub type WordCoeffs = BTreeMap<Word, Q>;

pub const BASIS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorBasis {
    degree_bound: usize,
    labels: Label,
    generators: Vec<CanonicalTree>,
    forward: BTreeMap<CanonicalForest, WordCoeffs>,
    backward: BTreeMap<Word, ForestSeries<Q>>,
}

/// Words of total degree exactly `n` over generators with the given degrees.
fn words_of_degree(degrees: &[usize], n: usize) -> Vec<Word> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (j, &dj) in degrees.iter().enumerate() {
        if dj <= n {
            for mut rest in words_of_degree(degrees, n - dj) {
                rest.insert(0, j as u32 + 1);
                out.push(rest);
            }
        }
    }
    out
}

fn series_vector(s: &ForestSeries<Q>, index: &HashMap<CanonicalForest, usize>) -> SparseVec {
    s.iter().map(|(f, c)| (index[f], c.clone())).collect()
}

impl GeneratorBasis {
    /// Build the generators and both change-of-basis tables up to degree `n_max`.
    pub fn compute(n_max: usize, d: Label) -> Result<Self> {
        if n_max == 0 || d == 0 {
            return Err(Error::domain("basis needs degree bound and label count at least 1"));
        }
        let mut generators: Vec<CanonicalTree> = Vec::new();
        let mut forward = BTreeMap::new();
        let mut backward: BTreeMap<Word, ForestSeries<Q>> = BTreeMap::new();
        backward.insert(Vec::new(), ForestSeries::unit(None));
        forward.insert(CanonicalForest::unit(), WordCoeffs::from([(Vec::new(), Q::one())]));

        for n in 1..=n_max {
            let forests = enumerate_forests(n, d);
            let index: HashMap<CanonicalForest, usize> =
                forests.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
            let degrees: Vec<usize> = generators.iter().map(|g| g.node_count()).collect();
            let mut words = words_of_degree(&degrees, n);
            let mut echelon = Echelon::default();
            for (tag, w) in words.iter().enumerate() {
                let (last, prefix) = w.split_last().expect("degree n > 0 word is non-empty");
                let gen = ForestSeries::from_tree(generators[*last as usize - 1].clone(), None);
                let value = gl_product(&backward[prefix], &gen);
                if !echelon.insert(&series_vector(&value, &index), tag) {
                    return Err(Error::BasisAnomaly {
                        degree: n,
                        message: format!("word {w:?} is dependent on earlier words"),
                    });
                }
                backward.insert(w.clone(), value);
            }
            for t in enumerate_trees(n, d) {
                if echelon.rank() == forests.len() {
                    break;
                }
                let v = SparseVec::from([(index[&CanonicalForest::single(t.clone())], Q::one())]);
                if echelon.is_independent(&v) {
                    generators.push(t.clone());
                    let w = vec![generators.len() as u32];
                    echelon.insert(&v, words.len());
                    backward.insert(w.clone(), ForestSeries::from_tree(t, None));
                    words.push(w);
                }
            }
            if echelon.rank() != forests.len() {
                return Err(Error::BasisAnomaly {
                    degree: n,
                    message: format!(
                        "trees complete only {} of {} dimensions",
                        echelon.rank(),
                        forests.len()
                    ),
                });
            }
            for (i, f) in forests.into_iter().enumerate() {
                let comb = echelon.unit_combination(i).expect("full rank");
                let coeffs = comb.iter().map(|(tag, c)| (words[*tag].clone(), c.clone())).collect();
                forward.insert(f, coeffs);
            }
        }
        Ok(GeneratorBasis {
            degree_bound: n_max,
            labels: d,
            generators,
            forward,
            backward,
        })
    }

    /// Process-wide cached basis for `(n_max, d)`.
    pub fn shared(n_max: usize, d: Label) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(usize, Label), Arc<GeneratorBasis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(b) = cache.lock().expect("basis cache poisoned").get(&(n_max, d)) {
            return Ok(Arc::clone(b));
        }
        let built = Arc::new(Self::compute(n_max, d)?);
        let mut guard = cache.lock().expect("basis cache poisoned");
        Ok(Arc::clone(guard.entry((n_max, d)).or_insert(built)))
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn labels(&self) -> Label {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CanonicalTree] {
        &self.generators
    }

    /// Generator `τ_j`, 1-based.
    pub fn generator(&self, j: u32) -> Option<&CanonicalTree> {
        (j as usize).checked_sub(1).and_then(|i| self.generators.get(i))
    }

    /// 1-based index of the generator equal to tree `t`.
    pub fn index_of(&self, t: &CanonicalTree) -> Option<u32> {
        self.generators.iter().position(|g| g == t).map(|i| i as u32 + 1)
    }

    pub fn generator_degrees(&self) -> Vec<usize> {
        self.generators.iter().map(|g| g.node_count()).collect()
    }

    /// Number of generators of each degree `1..=degree_bound`.
    pub fn counts_by_degree(&self) -> Vec<usize> {
        let mut out = vec![0; self.degree_bound];
        for g in &self.generators {
            out[g.node_count() - 1] += 1;
        }
        out
    }

    pub fn word_degree(&self, w: &[u32]) -> Result<usize> {
        w.iter()
            .map(|&r| {
                self.generator(r)
                    .map(|g| g.node_count())
                    .ok_or_else(|| Error::domain(format!("unknown generator index {r}")))
            })
            .sum()
    }

    pub fn forward_table(&self) -> &BTreeMap<CanonicalForest, WordCoeffs> {
        &self.forward
    }

    pub fn backward_table(&self) -> &BTreeMap<Word, ForestSeries<Q>> {
        &self.backward
    }

    /// The unique expansion `a = Σ λ_R τ_{r₁} ⋆ … ⋆ τ_{r_m}`.
    pub fn rewrite_to_words(&self, a: &ForestSeries<Q>) -> Result<WordCoeffs> {
        let mut out = WordCoeffs::new();
        for (f, c) in a.iter() {
            let row = self.forward.get(f).ok_or_else(|| {
                Error::domain(format!(
                    "forest {f} has degree {} beyond the basis bound {} or labels beyond {}",
                    f.node_count(),
                    self.degree_bound,
                    self.labels
                ))
            })?;
            for (w, l) in row {
                let e = out.entry(w.clone()).or_insert_with(Q::zero);
                *e += c * l;
                if e.is_zero() {
                    out.remove(w);
                }
            }
        }
        Ok(out)
    }

    /// Evaluate a word combination as a forest series.
    pub fn rewrite_to_forests(&self, words: &WordCoeffs, truncation: Option<usize>) -> Result<ForestSeries<Q>> {
        let mut out = ForestSeries::zero(truncation);
        for (w, c) in words {
            let value = self.word_value(w)?;
            for (f, v) in value.iter() {
                out.add_term(f.clone(), c * v);
            }
        }
        Ok(out)
    }

    /// `τ_{r₁} ⋆ … ⋆ τ_{r_m}` from the backward table.
    pub fn word_value(&self, w: &[u32]) -> Result<&ForestSeries<Q>> {
        let deg = self.word_degree(w)?;
        if deg > self.degree_bound {
            return Err(Error::domain(format!(
                "word {w:?} has degree {deg} beyond the basis bound {}",
                self.degree_bound
            )));
        }
        Ok(&self.backward[w])
    }

    pub fn to_json(&self) -> BasisJson {
        BasisJson {
            format_version: BASIS_FORMAT_VERSION,
            degree_bound: self.degree_bound,
            labels: self.labels,
            generators: self
                .generators
                .iter()
                .map(|g| ForestSeries::<Q>::from_tree(g.clone(), None).to_string())
                .collect(),
            forward_table: self
                .forward
                .iter()
                .map(|(f, row)| ForwardEntry {
                    forest: f.to_string(),
                    words: row
                        .iter()
                        .map(|(w, c)| WordTerm {
                            word: w.clone(),
                            coeff: format_q(c),
                        })
                        .collect(),
                })
                .collect(),
            backward_table: self
                .backward
                .iter()
                .map(|(w, s)| BackwardEntry {
                    word: w.clone(),
                    series: s.to_string(),
                })
                .collect(),
        }
    }

    /// Rebuild from JSON and check every invariant: generator shape and
    /// order, that each backward entry is the ⋆-product of its letters, that
    /// the tables cover all forests and words in range, and that forward and
    /// backward tables are mutually inverse.
    pub fn from_json(j: &BasisJson) -> Result<Self> {
        if j.format_version != BASIS_FORMAT_VERSION {
            return Err(Error::invariant(format!(
                "basis format version {} (expected {BASIS_FORMAT_VERSION})",
                j.format_version
            )));
        }
        let (n_max, d) = (j.degree_bound, j.labels);
        let mut generators = Vec::new();
        for text in &j.generators {
            let s = parse_series(text, None)?;
            let (f, c) = match s.iter().next() {
                Some(t) if s.len() == 1 => t,
                _ => return Err(Error::invariant(format!("generator {text} is not a single tree"))),
            };
            let t = f
                .as_tree()
                .filter(|_| c.is_one())
                .ok_or_else(|| Error::invariant(format!("generator {text} is not a single tree")))?;
            if t.node_count() > n_max || t.max_label() > d {
                return Err(Error::invariant(format!("generator {t} lies outside degree/label range")));
            }
            if generators.last().is_some_and(|g: &CanonicalTree| g.node_count() > t.node_count()) {
                return Err(Error::invariant("generator degrees must be non-decreasing"));
            }
            generators.push(t.clone());
        }
        let mut backward = BTreeMap::new();
        for e in &j.backward_table {
            backward.insert(e.word.clone(), parse_series(&e.series, None)?);
        }
        let mut forward = BTreeMap::new();
        for e in &j.forward_table {
            let f: CanonicalForest = e.forest.parse()?;
            let mut row = WordCoeffs::new();
            for t in &e.words {
                row.insert(t.word.clone(), parse_q(&t.coeff)?);
            }
            forward.insert(f, row);
        }
        let basis = GeneratorBasis {
            degree_bound: n_max,
            labels: d,
            generators,
            forward,
            backward,
        };
        basis.validate()?;
        Ok(basis)
    }

    fn validate(&self) -> Result<()> {
        let degrees = self.generator_degrees();
        let mut expected_words = 0;
        for n in 0..=self.degree_bound {
            for w in words_of_degree(&degrees, n) {
                expected_words += 1;
                let got = self
                    .backward
                    .get(&w)
                    .ok_or_else(|| Error::invariant(format!("backward table misses word {w:?}")))?;
                let want = match w.split_last() {
                    None => ForestSeries::unit(None),
                    Some((last, prefix)) => {
                        let gen = ForestSeries::from_tree(self.generators[*last as usize - 1].clone(), None);
                        gl_product(&self.backward[prefix], &gen)
                    }
                };
                if *got != want {
                    return Err(Error::invariant(format!("backward entry for {w:?} is not the ⋆-product")));
                }
            }
        }
        if self.backward.len() != expected_words {
            return Err(Error::invariant("backward table has words outside the degree range"));
        }
        let mut forests = 0;
        for n in 0..=self.degree_bound {
            for f in enumerate_forests(n, self.labels) {
                forests += 1;
                let row = self
                    .forward
                    .get(&f)
                    .ok_or_else(|| Error::invariant(format!("forward table misses forest {f}")))?;
                let value = self.rewrite_to_forests(row, None)?;
                if value != ForestSeries::from_forest(f.clone(), None) {
                    return Err(Error::invariant(format!("forward entry for {f} does not evaluate back to it")));
                }
            }
        }
        if self.forward.len() != forests || forests != expected_words {
            return Err(Error::invariant("forward table size does not match the forest count"));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let j: BasisJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_json(&j)
    }

    /// Load `basis-N{n}-d{d}-v{version}.json` from `dir`, computing and
    /// saving it first when absent.
    pub fn load_or_compute(dir: &Path, n_max: usize, d: Label) -> Result<Self> {
        let path = dir.join(format!("basis-N{n_max}-d{d}-v{BASIS_FORMAT_VERSION}.json"));
        if path.exists() {
            return Self::load(&path);
        }
        let b = Self::compute(n_max, d)?;
        std::fs::create_dir_all(dir)?;
        b.save(&path)?;
        Ok(b)
    }
}

/// Shorthand for [`GeneratorBasis::compute`].
pub fn compute_generators(n_max: usize, d: Label) -> Result<GeneratorBasis> {
    GeneratorBasis::compute(n_max, d)
}

/// Generator counts per degree predicted by freeness: if `f_n` counts
/// forests of degree `n`, then `Σ f_n tⁿ = 1 / (1 − Σ g_n tⁿ)`.
pub fn predicted_generator_counts(n_max: usize, d: Label) -> Vec<BigInt> {
    let f: Vec<BigInt> = (0..=n_max).map(|n| BigInt::from(enumerate_forests(n, d).len())).collect();
    // g_n = f_n − Σ_{k=1}^{n−1} g_k f_{n−k}
    let mut g = vec![BigInt::zero(); n_max + 1];
    for n in 1..=n_max {
        let mut v = f[n].clone();
        for k in 1..n {
            v -= &g[k] * &f[n - k];
        }
        g[n] = v;
    }
    g.into_iter().skip(1).collect()
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct WordTerm {
    pub word: Word,
    pub coeff: String,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ForwardEntry {
    pub forest: String,
    pub words: Vec<WordTerm>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct BackwardEntry {
    pub word: Word,
    pub series: String,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct BasisJson {
    pub format_version: u32,
    pub degree_bound: usize,
    pub labels: Label,
    pub generators: Vec<String>,
    pub forward_table: Vec<ForwardEntry>,
    pub backward_table: Vec<BackwardEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::qr;
    use crate::trees::{forest, tree};

    #[test]
    fn degree_two_basis() {
        for d in 1..=3u32 {
            let b = GeneratorBasis::compute(2, d).unwrap();
            assert_eq!(b.len() as u32, d * (d + 3) / 2);
        }
        let b = GeneratorBasis::compute(2, 2).unwrap();
        let names: Vec<String> = b.generators().iter().map(|t| t.to_string()).collect();
        // [•_i]_j with i ≤ j is written j[i]
        assert_eq!(names, ["1", "2", "1[1]", "2[1]", "2[2]"]);
    }

    #[test]
    fn rewrites_decomposable_forests() {
        let b = GeneratorBasis::compute(2, 2).unwrap();
        let w = b.rewrite_to_words(&ForestSeries::from_forest(forest("1 2"), None)).unwrap();
        let g = b.index_of(&tree("2[1]")).unwrap();
        assert_eq!(w, WordCoeffs::from([(vec![1, 2], qr(1, 1)), (vec![g], qr(-1, 1))]));
        let w = b.rewrite_to_words(&ForestSeries::from_forest(forest("1 1"), None)).unwrap();
        let g = b.index_of(&tree("1[1]")).unwrap();
        assert_eq!(w, WordCoeffs::from([(vec![1, 1], qr(1, 2)), (vec![g], qr(-1, 2))]));
    }

    #[test]
    fn poincare_counts() {
        let b = GeneratorBasis::compute(4, 1).unwrap();
        assert_eq!(b.counts_by_degree(), [1, 1, 1, 2]);
        let p: Vec<i64> = predicted_generator_counts(4, 1).iter().map(|v| v.try_into().unwrap()).collect();
        assert_eq!(p, [1, 1, 1, 2]);
    }

    #[test]
    fn json_round_trip_and_tamper_detection() {
        let b = GeneratorBasis::compute(3, 2).unwrap();
        let j = b.to_json();
        assert_eq!(GeneratorBasis::from_json(&j).unwrap(), b);
        let mut bad = j.clone();
        bad.forward_table[3].words[0].coeff = "7".into();
        assert!(matches!(GeneratorBasis::from_json(&bad), Err(Error::Invariant(_))));
        let mut bad = j;
        bad.format_version = 0;
        assert!(GeneratorBasis::from_json(&bad).is_err());
    }
}
