//! Exact rational law of small trees by summing over every labelled growth
//! history, compared with the floating-point oracles.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use pact_core::oracle::{closed_form_pmf_alpha0, enumerate_small, exact_root_cluster_pmf};
use pact_core::stats::stat_vector;
use pact_core::tree::{Colour, ColouredTree, Model};

use exact::*;

mod exact {
    use super::*;

    pub fn int(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    pub fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    pub fn to_f64(r: &BigRational) -> f64 {
        let scale = BigInt::from(10u64).pow(30);
        let q: BigInt = (r.numer() * &scale) / r.denom();
        q.to_string().parse::<f64>().unwrap() / 1e30
    }
}

#[derive(Clone, Copy)]
enum Attach {
    Uniform,
    Linear,
    Bounded(i64),
}

impl Attach {
    fn weight(self, outdeg: i64) -> BigRational {
        match self {
            Attach::Uniform => int(1),
            Attach::Linear => int(outdeg + 1),
            Attach::Bounded(d) => int((d - outdeg).max(0)),
        }
    }

    fn model(self, p: f64) -> Model {
        match self {
            Attach::Uniform => Model::with_alpha(0.0, p).unwrap(),
            Attach::Linear => Model::with_alpha(1.0, p).unwrap(),
            Attach::Bounded(d) => Model::dary(d as u32, p).unwrap(),
        }
    }
}

type Key = (u64, u64, u64, u64);

/// Walks every history, accumulating the law of
/// (red vertices, red clusters, red leaves, root cluster size).
fn walk(attach: Attach, keep: &BigRational, n: usize, tree: &ColouredTree, outdeg: &mut Vec<i64>, prob: BigRational, out: &mut BTreeMap<Key, BigRational>) {
    if tree.len() == n {
        let s = stat_vector(tree);
        let key = (s.red_vertices, s.red_clusters, s.red_leaves, root_cluster(tree));
        *out.entry(key).or_insert_with(|| int(0)) += prob;
        return;
    }
    let weights: Vec<BigRational> = outdeg.iter().map(|&k| attach.weight(k)).collect();
    let total: BigRational = weights.iter().cloned().fold(int(0), |a, b| a + b);
    let flip = int(1) - keep;
    for (v, w) in weights.iter().enumerate() {
        if *w == int(0) {
            continue;
        }
        let pick = &prob * w / &total;
        let parent_colour = tree.colour(v);
        for (colour, q) in [(parent_colour, keep), (parent_colour.flip(), &flip)] {
            let mut next = tree.clone();
            next.push_child(v, colour);
            outdeg[v] += 1;
            outdeg.push(0);
            walk(attach, keep, n, &next, outdeg, &pick * q, out);
            outdeg.pop();
            outdeg[v] -= 1;
        }
    }
}

fn root_cluster(tree: &ColouredTree) -> u64 {
    let root = tree.colour(0);
    let mut inside = vec![false; tree.len()];
    inside[0] = true;
    // parents precede children
    for v in 1..tree.len() {
        let u = tree.parent(v).unwrap();
        inside[v] = inside[u] && tree.colour(v) == root;
    }
    inside.iter().filter(|&&b| b).count() as u64
}

fn exact_law(attach: Attach, keep: &BigRational, n: usize) -> BTreeMap<Key, BigRational> {
    let mut out = BTreeMap::new();
    for c in [Colour::Red, Colour::Blue] {
        walk(attach, keep, n, &ColouredTree::new_root(c), &mut vec![0], ratio(1, 2), &mut out);
    }
    out
}

fn root_pmf(law: &BTreeMap<Key, BigRational>, n: usize) -> Vec<BigRational> {
    let mut pmf = vec![int(0); n + 1];
    for (k, pr) in law {
        pmf[k.3 as usize] += pr;
    }
    pmf
}

const CASES: [(i64, i64); 3] = [(3, 10), (1, 2), (4, 5)];

#[test]
fn law_sums_to_one() {
    for attach in [Attach::Uniform, Attach::Linear, Attach::Bounded(2), Attach::Bounded(3)] {
        let law = exact_law(attach, &ratio(3, 10), 5);
        let total = law.values().cloned().fold(int(0), |a, b| a + b);
        assert_eq!(total, int(1));
    }
}

#[test]
fn uniform_three_vertex_root_cluster() {
    // the third vertex picks the root or the second vertex with equal odds
    let keep = ratio(2, 5);
    let pmf = root_pmf(&exact_law(Attach::Uniform, &keep, 3), 3);
    let q = int(1) - &keep;
    assert_eq!(pmf[3], &keep * &keep);
    assert_eq!(pmf[1], &q * &q * ratio(1, 2) + &q * ratio(1, 2));
}

#[test]
fn exact_pmf_matches_rational_law() {
    for attach in [Attach::Uniform, Attach::Linear, Attach::Bounded(2), Attach::Bounded(3)] {
        for (a, b) in CASES {
            let keep = ratio(a, b);
            let model = attach.model(a as f64 / b as f64);
            for n in 1..=6 {
                let want = root_pmf(&exact_law(attach, &keep, n), n);
                let got = exact_root_cluster_pmf(&model, n).unwrap();
                for k in 1..=n {
                    assert!((got[k] - to_f64(&want[k])).abs() < 1e-13, "{model:?} n={n} k={k}");
                }
            }
        }
    }
}

#[test]
fn closed_form_matches_rational_law() {
    for (a, b) in CASES {
        let want = root_pmf(&exact_law(Attach::Uniform, &ratio(a, b), 7), 7);
        let got = closed_form_pmf_alpha0(7, a as f64 / b as f64).unwrap();
        for k in 1..=7 {
            assert!((got[k] - to_f64(&want[k])).abs() < 1e-13);
        }
    }
}

#[test]
fn enumeration_matches_rational_law() {
    for attach in [Attach::Uniform, Attach::Linear, Attach::Bounded(2)] {
        let keep = ratio(3, 10);
        let model = attach.model(0.3);
        for n in [4, 6] {
            let law = exact_law(attach, &keep, n);
            let dist = enumerate_small(&model, n).unwrap();
            let mut got: BTreeMap<Key, f64> = BTreeMap::new();
            for (s, pr) in dist.stat_vector_law() {
                *got.entry((s.red_vertices, s.red_clusters, s.red_leaves, s.root_cluster_size)).or_default() += pr;
            }
            assert_eq!(got.len(), law.len(), "{model:?} n={n}");
            for (k, pr) in &law {
                assert!((got[k] - to_f64(pr)).abs() < 1e-13, "{model:?} n={n} {k:?}");
            }
        }
    }
}
