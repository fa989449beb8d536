//! Small coloured rooted trees, canonical codes and fringe-subtree counts.
//!
//! Codes use the bracket notation `R(B,R(B))`: a colour letter, then the
//! children's codes sorted and enclosed in parentheses. Two coloured rooted
//! trees are isomorphic exactly when their codes agree, and the code parses
//! back to the tree.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{PactError, Result};
use crate::tree::{Colour, ColouredTree, Model};

/// Largest pattern size supported.
pub const K_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(String);

impl CanonicalCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for CanonicalCode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

fn join_code(colour: Colour, mut kids: Vec<String>) -> String {
    let mut s = String::new();
    s.push(colour.letter());
    if !kids.is_empty() {
        kids.sort();
        s.push('(');
        s.push_str(&kids.join(","));
        s.push(')');
    }
    s
}

/// Rooted unordered tree with coloured vertices; vertex 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredPattern {
    parent: Vec<usize>,
    colour: Vec<Colour>,
}

impl ColouredPattern {
    pub fn single(colour: Colour) -> Self {
        Self { parent: vec![0], colour: vec![colour] }
    }

    /// `parents[0]` is ignored; other entries must point to earlier vertices.
    pub fn from_parents(parents: &[usize], colours: &[Colour]) -> Result<Self> {
        if parents.is_empty() || parents.len() != colours.len() {
            return Err(PactError::InvalidArgument("pattern needs matching nonempty parents and colours".into()));
        }
        if parents.iter().enumerate().skip(1).any(|(v, &u)| u >= v) {
            return Err(PactError::InvalidArgument("pattern parents must precede children".into()));
        }
        let mut parent = parents.to_vec();
        parent[0] = 0;
        Ok(Self { parent, colour: colours.to_vec() })
    }

    /// Parse bracket notation such as `B(R,R)`.
    pub fn parse(text: &str) -> Result<Self> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pat = Self { parent: Vec::new(), colour: Vec::new() };
        let mut pos = 0;
        pat.parse_node(&chars, &mut pos, None)?;
        if pos != chars.len() {
            return Err(PactError::InvalidArgument(format!("trailing input in pattern {text:?}")));
        }
        Ok(pat)
    }

    fn parse_node(&mut self, s: &[char], pos: &mut usize, parent: Option<usize>) -> Result<()> {
        let colour = match s.get(*pos) {
            Some('R') | Some('r') => Colour::Red,
            Some('B') | Some('b') => Colour::Blue,
            other => return Err(PactError::InvalidArgument(format!("expected R or B, found {other:?}"))),
        };
        *pos += 1;
        let me = self.colour.len();
        self.colour.push(colour);
        self.parent.push(parent.unwrap_or(0));
        if s.get(*pos) == Some(&'(') {
            *pos += 1;
            loop {
                self.parse_node(s, pos, Some(me))?;
                match s.get(*pos) {
                    Some(',') => *pos += 1,
                    Some(')') => {
                        *pos += 1;
                        break;
                    }
                    other => return Err(PactError::InvalidArgument(format!("expected , or ), found {other:?}"))),
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.colour.len()
    }

    pub fn root_colour(&self) -> Colour {
        self.colour[0]
    }

    pub fn colour(&self, v: usize) -> Colour {
        self.colour[v]
    }

    pub fn children_of(&self, v: usize) -> Vec<usize> {
        (1..self.size()).filter(|&c| self.parent[c] == v).collect()
    }

    pub fn outdeg(&self, v: usize) -> usize {
        (1..self.size()).filter(|&c| self.parent[c] == v).count()
    }

    /// Number of vertices of each colour, `[red, blue]`.
    pub fn colour_counts(&self) -> [usize; 2] {
        let mut c = [0; 2];
        for col in &self.colour {
            c[col.index()] += 1;
        }
        c
    }

    /// Sum of `alpha outdeg + 1` over vertices of each colour.
    pub fn colour_weights(&self, model: &Model) -> [f64; 2] {
        let mut w = [0.0; 2];
        for v in 0..self.size() {
            w[self.colour[v].index()] += model.vertex_weight(self.outdeg(v) as u32);
        }
        w
    }

    fn code_string(&self, v: usize) -> String {
        join_code(self.colour[v], self.children_of(v).into_iter().map(|c| self.code_string(c)).collect())
    }

    pub fn canonical_code(&self) -> Result<CanonicalCode> {
        if self.size() > K_MAX {
            return Err(PactError::PatternTooLarge { size: self.size(), limit: K_MAX });
        }
        Ok(CanonicalCode(self.code_string(0)))
    }

    /// Canonical code without the size limit, for internal bookkeeping.
    pub(crate) fn code_unbounded(&self) -> CanonicalCode {
        CanonicalCode(self.code_string(0))
    }

    /// Copy with a new child of colour `colour` attached to `v`.
    pub fn with_leaf(&self, v: usize, colour: Colour) -> Self {
        let mut out = self.clone();
        out.parent.push(v);
        out.colour.push(colour);
        out
    }

    /// Copy with non-root leaf `v` removed.
    pub fn without_leaf(&self, v: usize) -> Self {
        assert!(v > 0 && self.outdeg(v) == 0);
        let mut parent = Vec::with_capacity(self.size() - 1);
        let mut colour = Vec::with_capacity(self.size() - 1);
        for u in 0..self.size() {
            if u == v {
                continue;
            }
            let p = self.parent[u];
            parent.push(if p > v { p - 1 } else { p });
            colour.push(self.colour[u]);
        }
        Self { parent, colour }
    }

    /// Fringe subtree rooted at `v`.
    pub fn subtree(&self, v: usize) -> Self {
        let mut map = HashMap::new();
        let mut parent = vec![0];
        let mut colour = vec![self.colour[v]];
        map.insert(v, 0);
        for u in (v + 1)..self.size() {
            if let Some(&pu) = map.get(&self.parent[u]) {
                map.insert(u, parent.len());
                parent.push(pu);
                colour.push(self.colour[u]);
            }
        }
        Self { parent, colour }
    }

    /// Whether the pattern can occur under `model` (`d`-ary out-degree cap).
    pub fn fits(&self, model: &Model) -> bool {
        model.arity().is_none_or(|d| (0..self.size()).all(|v| self.outdeg(v) <= d as usize))
    }

    pub fn leaves(&self) -> Vec<usize> {
        (1..self.size()).filter(|&v| self.outdeg(v) == 0).collect()
    }

    pub fn to_tree(&self) -> ColouredTree {
        ColouredTree::from_parents(&self.parent, &self.colour).expect("pattern parents precede children")
    }
}

impl fmt::Display for ColouredPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code_string(0))
    }
}

impl Serialize for ColouredPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Every coloured rooted tree with at most `max_size` vertices, sorted by
/// size and then code.
pub fn all_patterns(max_size: usize) -> Vec<ColouredPattern> {
    let mut out = Vec::new();
    let mut level = vec![ColouredPattern::single(Colour::Red), ColouredPattern::single(Colour::Blue)];
    for size in 1..=max_size {
        level.sort_by_key(|p| p.code_unbounded());
        out.extend(level.iter().cloned());
        if size == max_size {
            break;
        }
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for p in &level {
            for v in 0..p.size() {
                for c in [Colour::Red, Colour::Blue] {
                    let q = p.with_leaf(v, c);
                    if seen.insert(q.code_unbounded()) {
                        next.push(q);
                    }
                }
            }
        }
        level = next;
    }
    out
}

/// Smallest set containing `patterns` and both single vertices that is
/// closed under removing non-root leaves. Sorted by size, then code.
pub fn downward_closure(patterns: &[ColouredPattern]) -> Result<Vec<ColouredPattern>> {
    let mut seen: HashMap<String, ColouredPattern> = HashMap::new();
    let mut stack: Vec<ColouredPattern> = patterns.to_vec();
    stack.push(ColouredPattern::single(Colour::Red));
    stack.push(ColouredPattern::single(Colour::Blue));
    while let Some(p) = stack.pop() {
        let code = p.canonical_code()?.0;
        if seen.contains_key(&code) {
            continue;
        }
        for leaf in p.leaves() {
            stack.push(p.without_leaf(leaf));
        }
        seen.insert(code, p);
    }
    let mut out: Vec<(usize, String, ColouredPattern)> = seen.into_iter().map(|(c, p)| (p.size(), c, p)).collect();
    out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(out.into_iter().map(|t| t.2).collect())
}

/// Canonical codes of all fringe subtrees with at most `kmax` vertices;
/// `None` for larger subtrees.
pub fn fringe_codes(tree: &ColouredTree, kmax: usize) -> Vec<Option<String>> {
    let n = tree.len();
    let (off, flat) = tree.children();
    let mut size = vec![1usize; n];
    for v in (1..n).rev() {
        let u = tree.parent(v).expect("non-root");
        size[u] += size[v];
    }
    let mut codes: Vec<Option<String>> = vec![None; n];
    for v in (0..n).rev() {
        if size[v] > kmax {
            continue;
        }
        let kids: Vec<String> = flat[off[v]..off[v + 1]]
            .iter()
            .map(|&c| codes[c].clone().expect("child subtree is smaller"))
            .collect();
        codes[v] = Some(join_code(tree.colour(v), kids));
    }
    codes
}

fn pattern_index(patterns: &[ColouredPattern]) -> Result<(HashMap<String, usize>, usize)> {
    let mut idx = HashMap::new();
    let mut kmax = 0;
    for (i, p) in patterns.iter().enumerate() {
        let code = p.canonical_code()?;
        kmax = kmax.max(p.size());
        if idx.insert(code.0.clone(), i).is_some() {
            return Err(PactError::InvalidArgument(format!("duplicate pattern {code}")));
        }
    }
    Ok((idx, kmax))
}

/// Number of vertices whose fringe subtree is isomorphic to each pattern.
pub fn fringe_census(tree: &ColouredTree, patterns: &[ColouredPattern]) -> Result<Vec<u64>> {
    let (idx, kmax) = pattern_index(patterns)?;
    let mut counts = vec![0u64; patterns.len()];
    for code in fringe_codes(tree, kmax).into_iter().flatten() {
        if let Some(&i) = idx.get(&code) {
            counts[i] += 1;
        }
    }
    Ok(counts)
}

/// Decomposition of a tree into fringe-urn balls.
///
/// A vertex is covered when some proper ancestor's fringe subtree lies in the
/// pattern set. Uncovered vertices whose own fringe subtree is a pattern give
/// one ball of that pattern; the remaining uncovered vertices give
/// `alpha outdeg + 1` special balls of their colour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeUrnCensus {
    pub pattern_balls: Vec<u64>,
    /// Number of special vertices, `[red, blue]`.
    pub special_vertices: [u64; 2],
    /// Total out-degree of special vertices, `[red, blue]`.
    pub special_outdeg: [u64; 2],
}

impl FringeUrnCensus {
    /// Ball counts in urn order: patterns, then red and blue specials.
    pub fn urn_state(&self, model: &Model) -> Vec<f64> {
        let a = model.alpha();
        let mut s: Vec<f64> = self.pattern_balls.iter().map(|&c| c as f64).collect();
        for c in 0..2 {
            s.push(self.special_vertices[c] as f64 + a * self.special_outdeg[c] as f64);
        }
        s
    }
}

pub fn fringe_urn_census(tree: &ColouredTree, patterns: &[ColouredPattern]) -> Result<FringeUrnCensus> {
    let (idx, kmax) = pattern_index(patterns)?;
    let codes = fringe_codes(tree, kmax);
    let n = tree.len();
    let which: Vec<Option<usize>> = codes.iter().map(|c| c.as_ref().and_then(|s| idx.get(s).copied())).collect();
    let mut covered = vec![false; n];
    let mut out = FringeUrnCensus {
        pattern_balls: vec![0; patterns.len()],
        special_vertices: [0; 2],
        special_outdeg: [0; 2],
    };
    for v in 0..n {
        if let Some(u) = tree.parent(v) {
            covered[v] = covered[u] || which[u].is_some();
        }
        if covered[v] {
            continue;
        }
        match which[v] {
            Some(i) => out.pattern_balls[i] += 1,
            None => {
                let c = tree.colour(v).index();
                out.special_vertices[c] += 1;
                out.special_outdeg[c] += tree.outdeg(v) as u64;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use crate::stats::fixtures::example_tree;
    use crate::stats::leaf_counts;
    use crate::tree::grow_coloured_tree;
    use proptest::prelude::*;

    fn example_patterns() -> Vec<ColouredPattern> {
        ["R", "B", "R(B)", "B(R)", "R(B,B)", "B(R,R)"].iter().map(|s| ColouredPattern::parse(s).unwrap()).collect()
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["R", "B(R,R)", "R(B(R),B)", "B(B(B(B)))"] {
            let p = ColouredPattern::parse(s).unwrap();
            let again = ColouredPattern::parse(&p.to_string()).unwrap();
            assert_eq!(p.canonical_code().unwrap(), again.canonical_code().unwrap());
        }
        assert_eq!(ColouredPattern::parse("R(B(R),B)").unwrap().to_string(), "R(B,B(R))");
        assert!(ColouredPattern::parse("R(B").is_err());
        assert!(ColouredPattern::parse("X").is_err());
        assert!(ColouredPattern::parse("R)").is_err());
    }

    #[test]
    fn code_ignores_child_order() {
        let a = ColouredPattern::parse("R(B(R,B),R)").unwrap();
        let b = ColouredPattern::parse("R(R,B(B,R))").unwrap();
        assert_eq!(a.canonical_code(), b.canonical_code());
        let c = ColouredPattern::parse("R(B(R),R(B))").unwrap();
        assert_ne!(a.canonical_code(), c.canonical_code());
    }

    #[test]
    fn oversized_pattern_is_rejected() {
        let p = ColouredPattern::parse("R(R,R,R,R,R,R,R,R)").unwrap();
        assert_eq!(p.canonical_code(), Err(PactError::PatternTooLarge { size: 9, limit: K_MAX }));
    }

    #[test]
    fn pattern_counts_match_known_sequence() {
        // two-coloured rooted trees: 2, 4, 14, 52, 214
        let all = all_patterns(5);
        let mut by_size = [0usize; 6];
        for p in &all {
            by_size[p.size()] += 1;
        }
        assert_eq!(&by_size[1..], &[2, 4, 14, 52, 214]);
    }

    #[test]
    fn closure_of_a_path() {
        let p = ColouredPattern::parse("R(B(R))").unwrap();
        let codes: Vec<String> = downward_closure(&[p]).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(codes, ["B", "R", "R(B)", "R(B(R))"]);
        let all = all_patterns(4);
        assert_eq!(downward_closure(&all).unwrap(), all);
    }

    #[test]
    fn example_tree_fringe_counts() {
        let t = example_tree();
        let counts = fringe_census(&t, &example_patterns()).unwrap();
        assert_eq!(counts, vec![7, 5, 1, 1, 1, 2]);
    }

    #[test]
    fn example_tree_urn_census() {
        let t = example_tree();
        let census = fringe_urn_census(&t, &example_patterns()).unwrap();
        assert_eq!(census.pattern_balls, vec![2, 2, 1, 1, 1, 2]);
        assert_eq!(census.special_vertices, [4, 2]);
        assert_eq!(census.special_outdeg, [8, 6]);
        // weights are conserved: the balls account for n + alpha (n - 1)
        for alpha in [0.0, 0.7, 2.0] {
            let m = Model::with_alpha(alpha, 0.5).unwrap();
            let state = census.urn_state(&m);
            let pats = example_patterns();
            let act: f64 = pats
                .iter()
                .zip(&state)
                .map(|(p, &c)| c * (p.size() as f64 * (alpha + 1.0) - alpha))
                .sum::<f64>()
                + state[6]
                + state[7];
            assert!((act - m.total_weight(23)).abs() < 1e-12);
        }
    }

    #[test]
    fn leaf_removal_and_subtree() {
        let p = ColouredPattern::parse("R(B(R),B)").unwrap();
        let codes: HashSet<String> = p.leaves().into_iter().map(|v| p.without_leaf(v).to_string()).collect();
        assert_eq!(codes, ["R(B,B)".to_string(), "R(B(R))".to_string()].into_iter().collect());
        let b = p.children_of(0).into_iter().find(|&c| p.outdeg(c) == 1).unwrap();
        assert_eq!(p.subtree(b).to_string(), "B(R)");
    }

    proptest! {
        #[test]
        fn singleton_census_equals_leaf_counts(alpha in 0.0f64..2.0, p in 0.0f64..=1.0, n in 1usize..300, seed in any::<u64>()) {
            let m = Model::with_alpha(alpha, p).unwrap();
            let mut rng = replicate_rng(seed, 3);
            let t = grow_coloured_tree(&m, n, &mut rng).unwrap();
            let counts = fringe_census(&t, &[ColouredPattern::single(Colour::Red), ColouredPattern::single(Colour::Blue)]).unwrap();
            let (r, b) = leaf_counts(&t);
            prop_assert_eq!(counts, vec![r, b]);
        }

        #[test]
        fn urn_census_conserves_weight(alpha in 0.0f64..2.0, p in 0.0f64..=1.0, n in 1usize..300, seed in any::<u64>()) {
            let m = Model::with_alpha(alpha, p).unwrap();
            let mut rng = replicate_rng(seed, 4);
            let t = grow_coloured_tree(&m, n, &mut rng).unwrap();
            let pats = all_patterns(3);
            let census = fringe_urn_census(&t, &pats).unwrap();
            let state = census.urn_state(&m);
            let q = pats.len();
            let total: f64 = pats.iter().zip(&state).map(|(pt, &c)| c * (pt.size() as f64 * (alpha + 1.0) - alpha)).sum::<f64>()
                + state[q] + state[q + 1];
            prop_assert!((total - m.total_weight(n)).abs() < 1e-9 * (1.0 + n as f64));
        }
    }
}
