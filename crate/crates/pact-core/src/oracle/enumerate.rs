//! Exact law of the coloured tree at small sizes, as a distribution over
//! isomorphism classes.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{PactError, Result};
use crate::pattern::{ColouredPattern, K_MAX};
use crate::stats::{root_cluster_size, stat_vector, StatVector};
use crate::tree::{Colour, Model};

/// Largest size handled by [`enumerate_small`].
pub const ENUMERATION_MAX: usize = K_MAX;

#[derive(Debug, Clone, Serialize)]
pub struct ClassProbability {
    pub pattern: ColouredPattern,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeDistribution {
    pub n: usize,
    /// Sorted by canonical code.
    pub classes: Vec<ClassProbability>,
}

impl TreeDistribution {
    pub fn probability_of(&self, pattern: &ColouredPattern) -> f64 {
        let code = pattern.to_string();
        self.classes.iter().find(|c| c.pattern.to_string() == code).map_or(0.0, |c| c.prob)
    }

    /// Law of a derived quantity, sorted by key.
    pub fn marginal<K: Ord + Clone, F: Fn(&ColouredPattern) -> K>(&self, key: F) -> Vec<(K, f64)> {
        let mut m: std::collections::BTreeMap<K, f64> = std::collections::BTreeMap::new();
        for c in &self.classes {
            *m.entry(key(&c.pattern)).or_insert(0.0) += c.prob;
        }
        m.into_iter().collect()
    }

    /// `P(|C_n| = k)` for `k = 0..=n` (entry 0 is zero).
    pub fn root_cluster_pmf(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for c in &self.classes {
            out[root_cluster_size(&c.pattern.to_tree()) as usize] += c.prob;
        }
        out
    }

    pub fn stat_vector_law(&self) -> Vec<(StatVector, f64)> {
        let mut v: Vec<(StatVector, f64)> = Vec::new();
        for c in &self.classes {
            let s = stat_vector(&c.pattern.to_tree());
            match v.iter_mut().find(|e| e.0 == s) {
                Some(e) => e.1 += c.prob,
                None => v.push((s, c.prob)),
            }
        }
        v
    }
}

/// Exact distribution of the coloured tree with `n` vertices, obtained by
/// pushing the growth chain forward on isomorphism classes.
pub fn enumerate_small(model: &Model, n: usize) -> Result<TreeDistribution> {
    if n == 0 || n > ENUMERATION_MAX {
        return Err(PactError::OracleLimit { n, max: ENUMERATION_MAX });
    }
    let p = model.p();
    let mut layer: HashMap<String, (ColouredPattern, f64)> = HashMap::new();
    for c in [Colour::Red, Colour::Blue] {
        let pat = ColouredPattern::single(c);
        layer.insert(pat.to_string(), (pat, 0.5));
    }
    for m in 1..n {
        let total = model.total_weight(m);
        let mut next: HashMap<String, (ColouredPattern, f64)> = HashMap::new();
        for (pat, prob) in layer.values() {
            for v in 0..pat.size() {
                let w = model.vertex_weight(pat.outdeg(v) as u32);
                if w <= 0.0 {
                    continue;
                }
                let own = pat.colour(v);
                for (c, pc) in [(own, p), (own.flip(), 1.0 - p)] {
                    if pc == 0.0 {
                        continue;
                    }
                    let q = pat.with_leaf(v, c);
                    let e = next.entry(q.to_string()).or_insert_with(|| (q, 0.0));
                    e.1 += prob * w / total * pc;
                }
            }
        }
        layer = next;
    }
    let mut classes: Vec<(String, ClassProbability)> =
        layer.into_iter().map(|(code, (pattern, prob))| (code, ClassProbability { pattern, prob })).collect();
    classes.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(TreeDistribution { n, classes: classes.into_iter().map(|c| c.1).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices() {
        let m = Model::with_alpha(0.7, 0.3).unwrap();
        let d = enumerate_small(&m, 2).unwrap();
        assert_eq!(d.classes.len(), 4);
        let rr = d.probability_of(&ColouredPattern::parse("R(R)").unwrap());
        let rb = d.probability_of(&ColouredPattern::parse("R(B)").unwrap());
        assert!((rr - 0.15).abs() < 1e-15 && (rb - 0.35).abs() < 1e-15);
    }

    #[test]
    fn three_vertex_shapes_uniform_attachment() {
        let m = Model::with_alpha(0.0, 0.4).unwrap();
        let d = enumerate_small(&m, 3).unwrap();
        let shapes = d.marginal(|p| p.outdeg(0));
        assert_eq!(shapes.len(), 2);
        for (_, pr) in shapes {
            assert!((pr - 0.5).abs() < 1e-15);
        }
        let pmf = d.root_cluster_pmf();
        assert!((pmf[2] - 1.5 * 0.4 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn preferential_shapes() {
        // third vertex joins the root with probability (1 + alpha)/(2 + alpha)
        let a = 1.5;
        let m = Model::with_alpha(a, 0.5).unwrap();
        let d = enumerate_small(&m, 3).unwrap();
        let cherry: f64 = d.marginal(|p| p.outdeg(0)).iter().filter(|e| e.0 == 2).map(|e| e.1).sum();
        assert!((cherry - (1.0 + a) / (2.0 + a)).abs() < 1e-15);
    }

    #[test]
    fn dary_caps_degree() {
        let m = Model::dary(2, 0.6).unwrap();
        let d = enumerate_small(&m, 6).unwrap();
        assert!(d.classes.iter().all(|c| (0..c.pattern.size()).all(|v| c.pattern.outdeg(v) <= 2)));
        let total: f64 = d.classes.iter().map(|c| c.prob).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn size_limit() {
        let m = Model::with_alpha(0.0, 0.5).unwrap();
        assert!(enumerate_small(&m, ENUMERATION_MAX + 1).is_err());
        let d = enumerate_small(&m, ENUMERATION_MAX).unwrap();
        let total: f64 = d.classes.iter().map(|c| c.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
