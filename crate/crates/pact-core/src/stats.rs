//! Per-tree statistics: colour, cluster and leaf counts, root cluster.

use serde::Serialize;

use crate::tree::{percolation_forest, Colour, ColouredTree, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StatVector {
    pub red_vertices: u64,
    pub blue_vertices: u64,
    pub red_clusters: u64,
    pub blue_clusters: u64,
    pub red_leaves: u64,
    pub blue_leaves: u64,
    pub root_cluster_size: u64,
    pub root_colour: Colour,
}

fn by_colour(counts: [u64; 2]) -> (u64, u64) {
    (counts[0], counts[1])
}

/// `(red, blue)` vertex counts.
pub fn colour_counts(tree: &ColouredTree) -> (u64, u64) {
    let mut c = [0u64; 2];
    for &col in tree.colours() {
        c[col.index()] += 1;
    }
    by_colour(c)
}

/// `(red, blue)` cluster counts of the percolation forest.
pub fn cluster_counts(tree: &ColouredTree) -> (u64, u64) {
    let perc = percolation_forest(tree);
    let mut c = [0u64; 2];
    for &col in &perc.cluster_colour {
        c[col.index()] += 1;
    }
    by_colour(c)
}

/// `(red, blue)` leaf counts; a lone root counts as a leaf.
pub fn leaf_counts(tree: &ColouredTree) -> (u64, u64) {
    let mut c = [0u64; 2];
    for (v, &d) in tree.outdegrees().iter().enumerate() {
        if d == 0 {
            c[tree.colour(v).index()] += 1;
        }
    }
    by_colour(c)
}

/// Number of vertices joined to the root by a monochromatic path.
pub fn root_cluster_size(tree: &ColouredTree) -> u64 {
    let n = tree.len();
    let mut in_root = vec![false; n];
    in_root[0] = true;
    let mut size = 1;
    for v in 1..n {
        let u = tree.parent(v).expect("non-root has a parent");
        if in_root[u] && tree.colour(u) == tree.colour(v) {
            in_root[v] = true;
            size += 1;
        }
    }
    size
}

/// `(red, blue)` total attachment weight `sum (alpha outdeg + 1)` per colour.
pub fn colour_weights(tree: &ColouredTree, model: &Model) -> (f64, f64) {
    let mut w = [0.0f64; 2];
    for (v, &d) in tree.outdegrees().iter().enumerate() {
        w[tree.colour(v).index()] += model.vertex_weight(d);
    }
    (w[0], w[1])
}

pub fn stat_vector(tree: &ColouredTree) -> StatVector {
    let (red_vertices, blue_vertices) = colour_counts(tree);
    let (red_clusters, blue_clusters) = cluster_counts(tree);
    let (red_leaves, blue_leaves) = leaf_counts(tree);
    StatVector {
        red_vertices,
        blue_vertices,
        red_clusters,
        blue_clusters,
        red_leaves,
        blue_leaves,
        root_cluster_size: root_cluster_size(tree),
        root_colour: tree.colour(0),
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::tree::{Colour, ColouredTree};

    /// The 23-vertex example tree used throughout the tests. Vertices are
    /// listed breadth-first; `R`/`B` are colours.
    pub fn example_tree() -> ColouredTree {
        use Colour::{Blue as B, Red as R};
        let spec: [(usize, Colour); 23] = [
            (0, R),  // 0 root
            (0, R),  // 1
            (0, R),  // 2
            (0, R),  // 3
            (1, B),  // 4
            (2, B),  // 5 leaf
            (3, B),  // 6
            (3, R),  // 7
            (3, R),  // 8 leaf
            (4, B),  // 9 leaf
            (4, B),  // 10
            (4, R),  // 11
            (7, R),  // 12 leaf
            (6, B),  // 13 leaf
            (6, B),  // 14
            (6, B),  // 15
            (10, R), // 16 leaf
            (10, R), // 17 leaf
            (11, B), // 18 leaf
            (11, B), // 19 leaf
            (14, R), // 20 leaf
            (15, R), // 21 leaf
            (15, R), // 22 leaf
        ];
        let parents: Vec<usize> = spec.iter().map(|s| s.0).collect();
        let colours: Vec<Colour> = spec.iter().map(|s| s.1).collect();
        ColouredTree::from_parents(&parents, &colours).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::example_tree;
    use super::*;
    use crate::rng::replicate_rng;
    use crate::tree::grow_coloured_tree;
    use proptest::prelude::*;

    #[test]
    fn example_tree_counts() {
        let t = example_tree();
        let s = stat_vector(&t);
        assert_eq!((s.red_vertices, s.blue_vertices), (13, 10));
        assert_eq!((s.red_clusters, s.blue_clusters), (7, 5));
        assert_eq!((s.red_leaves, s.blue_leaves), (7, 5));
        assert_eq!(s.root_cluster_size, 7);
        assert_eq!(s.root_colour, Colour::Red);
    }

    #[test]
    fn example_tree_weights_are_linear_in_alpha() {
        let t = example_tree();
        for alpha in [0.0, 0.5, 1.0, 2.5] {
            let m = Model::with_alpha(alpha, 0.5).unwrap();
            let (r, b) = colour_weights(&t, &m);
            assert!((r - (13.0 + 11.0 * alpha)).abs() < 1e-12);
            assert!((b - (10.0 + 11.0 * alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_vertex() {
        let t = ColouredTree::new_root(Colour::Blue);
        let s = stat_vector(&t);
        assert_eq!((s.blue_vertices, s.blue_clusters, s.blue_leaves, s.root_cluster_size), (1, 1, 1, 1));
        assert_eq!((s.red_vertices, s.red_clusters, s.red_leaves), (0, 0, 0));
    }

    proptest! {
        #[test]
        fn weight_identity_links_counts(alpha in 0.0f64..3.0, p in 0.0f64..=1.0, n in 1usize..300, seed in any::<u64>()) {
            // red weight = (1+a) R - a R^c + a (B^c - [root blue])
            let m = Model::with_alpha(alpha, p).unwrap();
            let mut rng = replicate_rng(seed, 0);
            let t = grow_coloured_tree(&m, n, &mut rng).unwrap();
            let s = stat_vector(&t);
            let (rw, bw) = colour_weights(&t, &m);
            let root_blue = if s.root_colour == Colour::Blue { 1.0 } else { 0.0 };
            let want = (1.0 + alpha) * s.red_vertices as f64 - alpha * s.red_clusters as f64
                + alpha * (s.blue_clusters as f64 - root_blue);
            prop_assert!((rw - want).abs() < 1e-9 * (1.0 + want.abs()));
            prop_assert!((rw + bw - m.total_weight(n)).abs() < 1e-9 * n as f64);
        }

        #[test]
        fn basic_count_identities(alpha in 0.0f64..3.0, p in 0.0f64..=1.0, n in 1usize..300, seed in any::<u64>()) {
            let m = Model::with_alpha(alpha, p).unwrap();
            let mut rng = replicate_rng(seed, 2);
            let t = grow_coloured_tree(&m, n, &mut rng).unwrap();
            let s = stat_vector(&t);
            prop_assert_eq!(s.red_vertices + s.blue_vertices, n as u64);
            prop_assert!(s.red_leaves <= s.red_vertices && s.blue_leaves <= s.blue_vertices);
            prop_assert!(s.root_cluster_size >= 1 && s.root_cluster_size <= n as u64);
            let bichromatic = (1..n).filter(|&v| t.colour(v) != t.colour(t.parent(v).unwrap())).count() as u64;
            prop_assert_eq!(s.red_clusters + s.blue_clusters, 1 + bichromatic);
        }
    }
}
