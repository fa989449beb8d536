//! Model parameters, coloured increasing trees and their growth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PactError, Result};

/// Attachment exponent: a non-negative real, or the `d`-ary case `-1/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSpec {
    NonNegative(f64),
    DAry(u32),
}

impl AlphaSpec {
    pub fn value(&self) -> f64 {
        match *self {
            AlphaSpec::NonNegative(a) => a,
            AlphaSpec::DAry(d) => -1.0 / d as f64,
        }
    }
}

/// Tree model: attachment exponent plus colour-inheritance probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    alpha_spec: AlphaSpec,
    p: f64,
}

impl Model {
    pub fn new(alpha_spec: AlphaSpec, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PactError::InvalidModel(format!("p = {p} is outside [0, 1]")));
        }
        match alpha_spec {
            AlphaSpec::NonNegative(a) if !(a >= 0.0 && a.is_finite()) => {
                Err(PactError::InvalidModel(format!("alpha = {a} must be finite and >= 0")))
            }
            AlphaSpec::DAry(d) if d < 2 => Err(PactError::InvalidModel(format!("d = {d} must be >= 2"))),
            _ => Ok(Self { alpha_spec, p }),
        }
    }

    pub fn with_alpha(alpha: f64, p: f64) -> Result<Self> {
        Self::new(AlphaSpec::NonNegative(alpha), p)
    }

    pub fn dary(d: u32, p: f64) -> Result<Self> {
        Self::new(AlphaSpec::DAry(d), p)
    }

    pub fn alpha_spec(&self) -> AlphaSpec {
        self.alpha_spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_spec.value()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Branching bound `d` in the `d`-ary case.
    pub fn arity(&self) -> Option<u32> {
        match self.alpha_spec {
            AlphaSpec::DAry(d) => Some(d),
            AlphaSpec::NonNegative(_) => None,
        }
    }

    /// Unnormalised attachment weight `alpha * outdeg + 1` of a vertex.
    pub fn vertex_weight(&self, outdeg: u32) -> f64 {
        match self.alpha_spec {
            AlphaSpec::NonNegative(a) => a * outdeg as f64 + 1.0,
            AlphaSpec::DAry(d) => (d.saturating_sub(outdeg)) as f64 / d as f64,
        }
    }

    /// Sum of vertex weights in any tree with `n` vertices.
    pub fn total_weight(&self, n: usize) -> f64 {
        n as f64 + self.alpha() * (n as f64 - 1.0)
    }

    /// Largest eigenvalue of the colour urn, `1 + alpha`.
    pub fn lambda1(&self) -> f64 {
        1.0 + self.alpha()
    }

    /// Second eigenvalue of the colour urn, `2p + alpha - 1`.
    pub fn lambda2(&self) -> f64 {
        2.0 * self.p + self.alpha() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colour {
    Red,
    Blue,
}

impl Colour {
    pub fn flip(self) -> Self {
        match self {
            Colour::Red => Colour::Blue,
            Colour::Blue => Colour::Red,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Colour::Red => 0,
            Colour::Blue => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Colour::Red => 'R',
            Colour::Blue => 'B',
        }
    }
}

const NO_PARENT: u32 = u32::MAX;

/// Increasing tree with vertex colours; vertex `0` is the root and every
/// parent index is smaller than its child's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredTree {
    parent: Vec<u32>,
    outdeg: Vec<u32>,
    colour: Vec<Colour>,
}

impl ColouredTree {
    pub fn new_root(colour: Colour) -> Self {
        Self::with_capacity(colour, 1)
    }

    pub fn with_capacity(colour: Colour, cap: usize) -> Self {
        let mut t = Self {
            parent: Vec::with_capacity(cap),
            outdeg: Vec::with_capacity(cap),
            colour: Vec::with_capacity(cap),
        };
        t.parent.push(NO_PARENT);
        t.outdeg.push(0);
        t.colour.push(colour);
        t
    }

    /// Build from a parent list (`parents[0]` is ignored) and colours.
    pub fn from_parents(parents: &[usize], colours: &[Colour]) -> Result<Self> {
        if parents.is_empty() || parents.len() != colours.len() {
            return Err(PactError::InvalidArgument("parents and colours must be nonempty and equal length".into()));
        }
        let mut t = Self::with_capacity(colours[0], parents.len());
        for v in 1..parents.len() {
            if parents[v] >= v {
                return Err(PactError::InvalidArgument(format!("parent of {v} is {} (not smaller)", parents[v])));
            }
            t.push_child(parents[v], colours[v]);
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            u => Some(u as usize),
        }
    }

    pub fn colour(&self, v: usize) -> Colour {
        self.colour[v]
    }

    pub fn outdeg(&self, v: usize) -> u32 {
        self.outdeg[v]
    }

    pub fn colours(&self) -> &[Colour] {
        &self.colour
    }

    pub fn outdegrees(&self) -> &[u32] {
        &self.outdeg
    }

    /// Parent indices with the root mapped to itself.
    pub fn parents(&self) -> Vec<usize> {
        self.parent.iter().map(|&u| if u == NO_PARENT { 0 } else { u as usize }).collect()
    }

    pub fn push_child(&mut self, parent: usize, colour: Colour) -> usize {
        debug_assert!(parent < self.len());
        self.parent.push(parent as u32);
        self.outdeg.push(0);
        self.colour.push(colour);
        self.outdeg[parent] += 1;
        self.len() - 1
    }

    /// Children lists in compressed form: `(offsets, flat)`; children of `v`
    /// are `flat[offsets[v]..offsets[v + 1]]`, in increasing order.
    pub fn children(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + self.outdeg[v] as usize;
        }
        let mut fill = offsets.clone();
        let mut flat = vec![0usize; n.saturating_sub(1)];
        for v in 1..n {
            let u = self.parent[v] as usize;
            flat[fill[u]] = v;
            fill[u] += 1;
        }
        (offsets, flat)
    }

    /// Draw the parent of the next vertex.
    pub fn sample_parent<R: Rng + ?Sized>(&self, model: &Model, rng: &mut R) -> usize {
        let n = self.len();
        match model.alpha_spec() {
            AlphaSpec::NonNegative(alpha) => {
                // mass n on uniform vertices, alpha (n-1) on edge heads
                let total = n as f64 + alpha * (n as f64 - 1.0);
                if n == 1 || rng.random::<f64>() * total < n as f64 {
                    rng.random_range(0..n)
                } else {
                    self.parent[rng.random_range(1..n)] as usize
                }
            }
            AlphaSpec::DAry(d) => loop {
                let v = rng.random_range(0..n);
                if rng.random_range(0..d) >= self.outdeg[v] {
                    return v;
                }
            },
        }
    }

    /// Add one vertex according to the model; returns its index.
    pub fn grow_step<R: Rng + ?Sized>(&mut self, model: &Model, rng: &mut R) -> usize {
        let u = self.sample_parent(model, rng);
        let c = if rng.random::<f64>() < model.p() { self.colour[u] } else { self.colour[u].flip() };
        self.push_child(u, c)
    }
}

pub fn random_root_colour<R: Rng + ?Sized>(rng: &mut R) -> Colour {
    if rng.random::<bool>() {
        Colour::Red
    } else {
        Colour::Blue
    }
}

/// Grow a tree with `n` vertices from a root of uniform colour.
pub fn grow_coloured_tree<R: Rng + ?Sized>(model: &Model, n: usize, rng: &mut R) -> Result<ColouredTree> {
    if n == 0 {
        return Err(PactError::InvalidArgument("n must be at least 1".into()));
    }
    let mut t = ColouredTree::with_capacity(random_root_colour(rng), n);
    for _ in 1..n {
        t.grow_step(model, rng);
    }
    Ok(t)
}

/// Connected components after deleting bichromatic edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Percolation {
    /// Cluster label of each vertex; the root's cluster is label 0.
    pub labels: Vec<u32>,
    pub cluster_colour: Vec<Colour>,
    pub cluster_size: Vec<u32>,
}

impl Percolation {
    pub fn cluster_count(&self) -> usize {
        self.cluster_colour.len()
    }
}

pub fn percolation_forest(tree: &ColouredTree) -> Percolation {
    let n = tree.len();
    let mut labels = vec![0u32; n];
    let mut cluster_colour = vec![tree.colour(0)];
    let mut cluster_size = vec![1u32];
    for v in 1..n {
        let u = tree.parent[v] as usize;
        if tree.colour[v] == tree.colour[u] {
            labels[v] = labels[u];
            cluster_size[labels[u] as usize] += 1;
        } else {
            labels[v] = cluster_colour.len() as u32;
            cluster_colour.push(tree.colour[v]);
            cluster_size.push(1);
        }
    }
    Percolation { labels, cluster_colour, cluster_size }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use proptest::prelude::*;

    fn union_find_components(tree: &ColouredTree) -> Vec<usize> {
        let n = tree.len();
        let mut up: Vec<usize> = (0..n).collect();
        fn find(up: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while up[r] != r {
                r = up[r];
            }
            let mut y = x;
            while up[y] != r {
                let nx = up[y];
                up[y] = r;
                y = nx;
            }
            r
        }
        for v in 1..n {
            let u = tree.parent(v).unwrap();
            if tree.colour(u) == tree.colour(v) {
                let (a, b) = (find(&mut up, u), find(&mut up, v));
                up[a.max(b)] = a.min(b);
            }
        }
        (0..n).map(|v| find(&mut up, v)).collect()
    }

    #[test]
    fn model_validation() {
        assert!(Model::with_alpha(-0.1, 0.5).is_err());
        assert!(Model::with_alpha(0.0, 1.1).is_err());
        assert!(Model::dary(1, 0.5).is_err());
        assert!(Model::with_alpha(f64::INFINITY, 0.5).is_err());
        let m = Model::dary(3, 0.2).unwrap();
        assert!((m.alpha() + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.vertex_weight(3), 0.0);
    }

    #[test]
    fn total_weight_matches_sum_of_vertex_weights() {
        for model in [Model::with_alpha(0.7, 0.4).unwrap(), Model::dary(3, 0.4).unwrap()] {
            let mut rng = replicate_rng(11, 0);
            let t = grow_coloured_tree(&model, 500, &mut rng).unwrap();
            let s: f64 = t.outdegrees().iter().map(|&d| model.vertex_weight(d)).sum();
            assert!((s - model.total_weight(500)).abs() < 1e-9);
        }
    }

    #[test]
    fn p_one_and_zero_are_deterministic_colourings() {
        let mut rng = replicate_rng(5, 1);
        let t = grow_coloured_tree(&Model::with_alpha(1.0, 1.0).unwrap(), 200, &mut rng).unwrap();
        assert!(t.colours().iter().all(|&c| c == t.colour(0)));
        let t = grow_coloured_tree(&Model::with_alpha(1.0, 0.0).unwrap(), 200, &mut rng).unwrap();
        for v in 1..t.len() {
            assert_ne!(t.colour(v), t.colour(t.parent(v).unwrap()));
        }
    }

    #[test]
    fn children_lists_are_consistent() {
        let mut rng = replicate_rng(2, 9);
        let t = grow_coloured_tree(&Model::with_alpha(0.5, 0.5).unwrap(), 300, &mut rng).unwrap();
        let (off, flat) = t.children();
        for v in 0..t.len() {
            let kids = &flat[off[v]..off[v + 1]];
            assert_eq!(kids.len(), t.outdeg(v) as usize);
            assert!(kids.iter().all(|&c| t.parent(c) == Some(v)));
        }
    }

    #[test]
    fn from_parents_rejects_non_increasing() {
        let cs = [Colour::Red; 3];
        assert!(ColouredTree::from_parents(&[0, 0, 2], &cs).is_err());
        assert!(ColouredTree::from_parents(&[0, 0, 1], &cs).is_ok());
    }

    fn model_strategy() -> impl Strategy<Value = Model> {
        prop_oneof![
            (0.0f64..3.0, 0.0f64..=1.0).prop_map(|(a, p)| Model::with_alpha(a, p).unwrap()),
            (2u32..5, 0.0f64..=1.0).prop_map(|(d, p)| Model::dary(d, p).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn growth_invariants(model in model_strategy(), n in 1usize..400, seed in any::<u64>()) {
            let mut rng = replicate_rng(seed, 0);
            let t = grow_coloured_tree(&model, n, &mut rng).unwrap();
            prop_assert_eq!(t.len(), n);
            prop_assert_eq!(t.parent(0), None);
            let mut deg = vec![0u32; n];
            for v in 1..n {
                let u = t.parent(v).unwrap();
                prop_assert!(u < v);
                deg[u] += 1;
            }
            prop_assert_eq!(&deg[..], t.outdegrees());
            if let Some(d) = model.arity() {
                prop_assert!(t.outdegrees().iter().all(|&k| k <= d));
            }
        }

        #[test]
        fn percolation_matches_union_find(model in model_strategy(), n in 1usize..300, seed in any::<u64>()) {
            let mut rng = replicate_rng(seed, 1);
            let t = grow_coloured_tree(&model, n, &mut rng).unwrap();
            let perc = percolation_forest(&t);
            let uf = union_find_components(&t);
            for a in 0..n {
                // same label iff same union-find root
                let b = (a * 7919 + 13) % n;
                prop_assert_eq!(perc.labels[a] == perc.labels[b], uf[a] == uf[b]);
                prop_assert_eq!(perc.cluster_colour[perc.labels[a] as usize], t.colour(a));
            }
            let bichromatic = (1..n).filter(|&v| t.colour(v) != t.colour(t.parent(v).unwrap())).count();
            prop_assert_eq!(perc.cluster_count(), 1 + bichromatic);
            prop_assert_eq!(perc.cluster_size.iter().map(|&s| s as usize).sum::<usize>(), n);
        }
    }
}
