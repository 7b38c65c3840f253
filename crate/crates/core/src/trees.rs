//! Labelled rooted trees and forests in canonical form.
//!
//! Children of every node are kept sorted under the canonical order
//! (node count, then children lexicographically, then root label), so two
//! values describing the same unordered labelled tree are structurally equal.
//!
//! Text form: `2[1,1[2]]` is a root labelled 2 carrying a leaf labelled 1 and
//! the tree `1[2]`; a forest is a whitespace-separated list of trees, and `e`
//! is the empty forest.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::factorial;

pub type Label = u32;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CanonicalTree {
    label: Label,
    children: Vec<CanonicalTree>,
    nodes: usize,
}

impl CanonicalTree {
    /// Single node with the given label.
    pub fn leaf(label: Label) -> Self {
        CanonicalTree {
            label,
            children: Vec::new(),
            nodes: 1,
        }
    }

    /// `[children]_label`; the children may be given in any order.
    pub fn new(label: Label, mut children: Vec<CanonicalTree>) -> Self {
        children.sort();
        let nodes = 1 + children.iter().map(|c| c.nodes).sum::<usize>();
        CanonicalTree {
            label,
            children,
            nodes,
        }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn children(&self) -> &[CanonicalTree] {
        &self.children
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn max_label(&self) -> Label {
        self.children
            .iter()
            .map(|c| c.max_label())
            .fold(self.label, Label::max)
    }

    /// The children as a forest.
    pub fn children_forest(&self) -> CanonicalForest {
        CanonicalForest::from_sorted(self.children.clone())
    }

    /// Distinct children with their multiplicities, in canonical order.
    pub fn child_classes(&self) -> Vec<(&CanonicalTree, usize)> {
        multiplicities(&self.children)
    }

    /// Remove one copy of `child` from the root; `None` if absent.
    pub fn without_child(&self, child: &CanonicalTree) -> Option<CanonicalTree> {
        let pos = self.children.iter().position(|c| c == child)?;
        let mut rest = self.children.clone();
        rest.remove(pos);
        Some(CanonicalTree::new(self.label, rest))
    }

    /// Labels in pre-order, root first.
    pub fn labels_preorder(&self) -> Vec<Label> {
        let mut out = Vec::with_capacity(self.nodes);
        fn walk(t: &CanonicalTree, out: &mut Vec<Label>) {
            out.push(t.label);
            for c in &t.children {
                walk(c, out);
            }
        }
        walk(self, &mut out);
        out
    }
}

impl Ord for CanonicalTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nodes
            .cmp(&other.nodes)
            .then_with(|| self.children.cmp(&other.children))
            .then_with(|| self.label.cmp(&other.label))
    }
}

impl PartialOrd for CanonicalTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Build `[children]_label` after checking the label lies in `1..=labels`.
pub fn canonicalize(label: Label, children: Vec<CanonicalTree>, labels: Label) -> Result<CanonicalTree> {
    if label == 0 || label > labels {
        return Err(Error::domain(format!(
            "label {label} outside 1..={labels}"
        )));
    }
    Ok(CanonicalTree::new(label, children))
}

/// A multiset of trees, stored sorted. The empty forest is the unit.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CanonicalForest {
    trees: Vec<CanonicalTree>,
    nodes: usize,
}

impl CanonicalForest {
    pub fn unit() -> Self {
        CanonicalForest::default()
    }

    pub fn single(tree: CanonicalTree) -> Self {
        let nodes = tree.nodes;
        CanonicalForest {
            trees: vec![tree],
            nodes,
        }
    }

    pub fn from_trees(mut trees: Vec<CanonicalTree>) -> Self {
        trees.sort();
        Self::from_sorted(trees)
    }

    fn from_sorted(trees: Vec<CanonicalTree>) -> Self {
        let nodes = trees.iter().map(|t| t.nodes).sum();
        CanonicalForest { trees, nodes }
    }

    pub fn trees(&self) -> &[CanonicalTree] {
        &self.trees
    }

    pub fn into_trees(self) -> Vec<CanonicalTree> {
        self.trees
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn is_unit(&self) -> bool {
        self.trees.is_empty()
    }

    /// The single tree of a one-tree forest.
    pub fn as_tree(&self) -> Option<&CanonicalTree> {
        match self.trees.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    pub fn max_label(&self) -> Label {
        self.trees.iter().map(|t| t.max_label()).max().unwrap_or(0)
    }

    /// Forest concatenation (multiset union).
    pub fn concat(&self, other: &CanonicalForest) -> CanonicalForest {
        let mut trees = Vec::with_capacity(self.trees.len() + other.trees.len());
        let (mut i, mut j) = (0, 0);
        while i < self.trees.len() && j < other.trees.len() {
            if self.trees[i] <= other.trees[j] {
                trees.push(self.trees[i].clone());
                i += 1;
            } else {
                trees.push(other.trees[j].clone());
                j += 1;
            }
        }
        trees.extend_from_slice(&self.trees[i..]);
        trees.extend_from_slice(&other.trees[j..]);
        CanonicalForest {
            trees,
            nodes: self.nodes + other.nodes,
        }
    }

    /// Distinct trees with their multiplicities.
    pub fn tree_classes(&self) -> Vec<(&CanonicalTree, usize)> {
        multiplicities(&self.trees)
    }
}

impl Ord for CanonicalForest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nodes
            .cmp(&other.nodes)
            .then_with(|| self.trees.cmp(&other.trees))
    }
}

impl PartialOrd for CanonicalForest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<CanonicalTree> for CanonicalForest {
    fn from(t: CanonicalTree) -> Self {
        CanonicalForest::single(t)
    }
}

fn multiplicities(sorted: &[CanonicalTree]) -> Vec<(&CanonicalTree, usize)> {
    let mut out: Vec<(&CanonicalTree, usize)> = Vec::new();
    for t in sorted {
        match out.last_mut() {
            Some((prev, m)) if *prev == t => *m += 1,
            _ => out.push((t, 1)),
        }
    }
    out
}

/// All trees with exactly `n` nodes and labels in `1..=d`, in canonical order.
pub fn enumerate_trees(n: usize, d: Label) -> Vec<CanonicalTree> {
    Enumerator::new(d).trees(n).to_vec()
}

/// All forests with exactly `n` nodes and labels in `1..=d`, in canonical order.
pub fn enumerate_forests(n: usize, d: Label) -> Vec<CanonicalForest> {
    let mut e = Enumerator::new(d);
    let mut out: Vec<CanonicalForest> = e
        .multisets(n)
        .into_iter()
        .map(CanonicalForest::from_sorted)
        .collect();
    out.sort();
    out
}

/// All forests with at most `n` nodes, grouped by increasing node count.
pub fn enumerate_forests_upto(n: usize, d: Label) -> Vec<CanonicalForest> {
    (0..=n).flat_map(|m| enumerate_forests(m, d)).collect()
}

struct Enumerator {
    d: Label,
    by_size: Vec<Vec<CanonicalTree>>,
}

impl Enumerator {
    fn new(d: Label) -> Self {
        Enumerator {
            d,
            by_size: vec![Vec::new()],
        }
    }

    fn trees(&mut self, n: usize) -> &[CanonicalTree] {
        while self.by_size.len() <= n {
            let m = self.by_size.len();
            let mut level = Vec::new();
            for children in self.multisets(m - 1) {
                for label in 1..=self.d {
                    level.push(CanonicalTree::new(label, children.clone()));
                }
            }
            level.sort();
            level.dedup();
            self.by_size.push(level);
        }
        &self.by_size[n]
    }

    /// Sorted tree sequences with total node count `n`.
    fn multisets(&mut self, n: usize) -> Vec<Vec<CanonicalTree>> {
        for m in 1..=n {
            self.trees(m);
        }
        // pool of all trees of size <= n in canonical order
        let pool: Vec<&CanonicalTree> = (1..=n).flat_map(|m| self.by_size[m].iter()).collect();
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn rec<'a>(
            pool: &[&'a CanonicalTree],
            start: usize,
            remaining: usize,
            current: &mut Vec<&'a CanonicalTree>,
            out: &mut Vec<Vec<CanonicalTree>>,
        ) {
            if remaining == 0 {
                out.push(current.iter().map(|t| (*t).clone()).collect());
                return;
            }
            for (i, t) in pool.iter().enumerate().skip(start) {
                if t.nodes > remaining {
                    // pool is ordered by node count first
                    break;
                }
                current.push(t);
                rec(pool, i, remaining - t.nodes, current, out);
                current.pop();
            }
        }
        rec(&pool, 0, n, &mut current, &mut out);
        out
    }
}

/// Tree factorial: `|τ|` times the product of the children's factorials.
pub fn tree_factorial(t: &CanonicalTree) -> BigInt {
    t.children
        .iter()
        .fold(BigInt::from(t.nodes), |acc, c| acc * tree_factorial(c))
}

/// Order of the automorphism group of a labelled rooted tree.
pub fn symmetry_factor(t: &CanonicalTree) -> BigInt {
    t.child_classes()
        .into_iter()
        .fold(BigInt::one(), |acc, (c, m)| {
            acc * factorial(m) * num::pow(symmetry_factor(c), m)
        })
}

/// Automorphism count of a forest: tree symmetries times permutations of
/// identical trees.
pub fn forest_symmetry_factor(f: &CanonicalForest) -> BigInt {
    f.tree_classes()
        .into_iter()
        .fold(BigInt::one(), |acc, (t, m)| {
            acc * factorial(m) * num::pow(symmetry_factor(t), m)
        })
}

/// Multiplicity count of each label over all nodes (index 0 unused).
pub fn label_counts(f: &CanonicalForest) -> BTreeMap<Label, usize> {
    let mut out = BTreeMap::new();
    for t in f.trees() {
        for l in t.labels_preorder() {
            *out.entry(l).or_insert(0) += 1;
        }
    }
    out
}

// ---- text form ----

impl fmt::Display for CanonicalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("[")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CanonicalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({self})")
    }
}

impl fmt::Display for CanonicalForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return f.write_str("e");
        }
        for (i, t) in self.trees.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CanonicalForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Forest({self})")
    }
}

pub(crate) struct Cursor<'a> {
    pub src: &'a str,
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    pub fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    pub fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.src, self.pos, msg)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    pub fn number(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a digit"));
        }
        Ok(&self.src[start..self.pos])
    }

    pub fn tree(&mut self) -> Result<CanonicalTree> {
        let start = self.pos;
        let label: Label = self
            .number()?
            .parse()
            .map_err(|_| Error::parse(self.src, start, "label too large"))?;
        if label == 0 {
            return Err(Error::parse(self.src, start, "labels start at 1"));
        }
        let mut children = Vec::new();
        if self.peek() == Some(b'[') {
            self.pos += 1;
            loop {
                self.skip_ws();
                children.push(self.tree()?);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b']') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ']'")),
                }
            }
        }
        Ok(CanonicalTree::new(label, children))
    }

    /// Forest: `e` or whitespace-separated trees. Stops at the first byte
    /// that cannot start a tree.
    pub fn forest(&mut self) -> Result<CanonicalForest> {
        self.skip_ws();
        if self.peek() == Some(b'e') {
            self.pos += 1;
            return Ok(CanonicalForest::unit());
        }
        let mut trees = vec![self.tree()?];
        loop {
            let save = self.pos;
            self.skip_ws();
            if matches!(self.peek(), Some(b) if b.is_ascii_digit()) && save != self.pos {
                trees.push(self.tree()?);
            } else {
                self.pos = save;
                break;
            }
        }
        Ok(CanonicalForest::from_trees(trees))
    }
}

impl FromStr for CanonicalTree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut c = Cursor::new(s);
        c.skip_ws();
        let t = c.tree()?;
        c.skip_ws();
        if !c.at_end() {
            return Err(c.err("trailing input after tree"));
        }
        Ok(t)
    }
}

impl FromStr for CanonicalForest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut c = Cursor::new(s);
        let f = c.forest()?;
        c.skip_ws();
        if !c.at_end() {
            return Err(c.err("trailing input after forest"));
        }
        Ok(f)
    }
}

impl Serialize for CanonicalForest {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CanonicalForest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand used throughout the tests: parse a tree, panicking on bad input.
pub fn tree(s: &str) -> CanonicalTree {
    s.parse().expect("valid tree text")
}

/// Shorthand: parse a forest, panicking on bad input.
pub fn forest(s: &str) -> CanonicalForest {
    s.parse().expect("valid forest text")
}
