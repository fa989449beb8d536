use pact_core::oracle::exact_root_cluster_pmf;
use pact_core::pattern::{fringe_census, ColouredPattern};
use pact_core::rng::replicate_rng;
use pact_core::stats::{cluster_counts, colour_counts, leaf_counts, root_cluster_size};
use pact_core::tree::{grow_coloured_tree, Colour, Model};
use pact_core::urn::{build_urn, run_urn, UrnKind};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = Model> {
    prop_oneof![
        (0.0f64..3.0, 0.0f64..=1.0).prop_map(|(a, p)| Model::with_alpha(a, p).unwrap()),
        (2u32..6, 0.0f64..=1.0).prop_map(|(d, p)| Model::dary(d, p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_counts_are_consistent(model in model_strategy(), n in 1usize..400, seed in any::<u64>()) {
        let tree = grow_coloured_tree(&model, n, &mut replicate_rng(seed, 0)).unwrap();
        let (r, b) = colour_counts(&tree);
        prop_assert_eq!(r + b, n as u64);
        let bichromatic = (1..n).filter(|&v| tree.colour(v) != tree.colour(tree.parent(v).unwrap())).count() as u64;
        let (rc, bc) = cluster_counts(&tree);
        prop_assert_eq!(rc + bc, 1 + bichromatic);
        let (rl, bl) = leaf_counts(&tree);
        prop_assert_eq!(rl + bl, tree.outdegrees().iter().filter(|&&k| k == 0).count() as u64);
        let singles = [ColouredPattern::single(Colour::Red), ColouredPattern::single(Colour::Blue)];
        prop_assert_eq!(fringe_census(&tree, &singles).unwrap(), vec![rl, bl]);
        let size = root_cluster_size(&tree);
        let same = if tree.colour(0) == Colour::Red { r } else { b };
        prop_assert!(size >= 1 && size <= same);
        if let Some(d) = model.arity() {
            prop_assert!(tree.outdegrees().iter().all(|&k| k <= d));
        }
    }

    #[test]
    fn growth_is_reproducible(model in model_strategy(), n in 1usize..200, seed in any::<u64>(), rep in 0u64..1000) {
        let a = grow_coloured_tree(&model, n, &mut replicate_rng(seed, rep)).unwrap();
        let b = grow_coloured_tree(&model, n, &mut replicate_rng(seed, rep)).unwrap();
        prop_assert_eq!(a.parents(), b.parents());
        prop_assert_eq!(a.colours(), b.colours());
    }

    #[test]
    fn weight_urn_keeps_total_weight(model in model_strategy(), n in 1usize..300, seed in any::<u64>()) {
        let spec = build_urn(&UrnKind::Weight2, &model).unwrap();
        let x = run_urn(&spec, spec.initial(Colour::Red), n - 1, &mut replicate_rng(seed, 0)).unwrap();
        let total: f64 = x.iter().sum();
        prop_assert!((total - model.total_weight(n)).abs() < 1e-9 * n as f64);
        prop_assert!(x.iter().all(|&v| v >= -1e-9));
    }

    #[test]
    fn exact_pmf_is_a_distribution(model in model_strategy(), n in 1usize..64) {
        let pmf = exact_root_cluster_pmf(&model, n).unwrap();
        prop_assert_eq!(pmf.len(), n + 1);
        prop_assert!(pmf.iter().all(|&q| q >= -1e-15));
        prop_assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
