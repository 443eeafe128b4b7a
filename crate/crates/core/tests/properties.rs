//! Property tests for trees, coalescent traces, selection records and the
//! statistical helpers.

use proptest::prelude::*;
use rand::RngExt;
use rrt_core::coalescent::{
    predicate_a, run_coalescent, sample_conditional_degrees, sample_selection, truncate,
    SelectionRecord,
};
use rrt_core::experiments::{check_trace, check_tree, run_replicates};
use rrt_core::limits::{
    cond_degree_depth, fixed_label_depth, ks_distance, lattice_ks, lattice_normal_cdf, normal_cdf,
    Affine,
};
use rrt_core::seed::{rng_from_seed, DOMAIN_MODEL};
use rrt_core::{build_rrt, top_degree_order, TreeTopology, Vertex};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rrt_structure(n in 1usize..400, seed in any::<u64>()) {
        let t = build_rrt(n, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(t.n(), n);
        prop_assert!(t.is_increasing());
        prop_assert_eq!(t.in_degrees().iter().map(|&d| d as usize).sum::<usize>(), n - 1);
        prop_assert_eq!(t.depth(1).unwrap(), 0);
        let tracked: Vec<Vertex> = (1..=n.min(12) as Vertex).collect();
        prop_assert!(check_tree(&t, &tracked, true).is_ok());
    }

    #[test]
    fn distance_is_a_metric(n in 2usize..200, seed in any::<u64>(), picks in prop::collection::vec(any::<u32>(), 3)) {
        let t = build_rrt(n, &mut rng_from_seed(seed)).unwrap();
        let [u, v, w] = [0, 1, 2].map(|i| picks[i] % n as u32 + 1);
        let d = |a, b| t.distance(a, b).unwrap();
        prop_assert_eq!(d(u, u), 0);
        prop_assert_eq!(d(u, v), d(v, u));
        prop_assert_eq!(d(u, v) == 0, u == v);
        prop_assert!(d(u, w) <= d(u, v) + d(v, w));
        prop_assert_eq!(d(1, v), t.depth(v).unwrap());
        let lca = t.lca(u, v).unwrap();
        prop_assert!(lca <= u.min(v));
    }

    #[test]
    fn edge_list_roundtrip(n in 1usize..100, seed in any::<u64>()) {
        let t = build_rrt(n, &mut rng_from_seed(seed)).unwrap();
        let mut buf = Vec::new();
        t.write_edge_list(&mut buf).unwrap();
        prop_assert_eq!(TreeTopology::read_edge_list(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn top_degree_order_is_sorted_permutation(n in 1usize..200, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let t = build_rrt(n, &mut rng).unwrap();
        let order = top_degree_order(&t, &mut rng);
        prop_assert_eq!(order.len(), n);
        prop_assert!(order.windows(2).all(|w| w[0].degree >= w[1].degree));
        let mut labels: Vec<Vertex> = order.iter().map(|s| s.label).collect();
        labels.sort_unstable();
        prop_assert_eq!(labels, (1..=n as Vertex).collect::<Vec<_>>());
    }

    #[test]
    fn coalescent_flips_agree_with_tree(n in 1usize..300, k in 1usize..6, seed in any::<u64>()) {
        let trace = run_coalescent(n, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(trace.merges().len(), n - 1);
        let rec = SelectionRecord::from_trace(&trace, k.min(n)).unwrap();
        prop_assert!(check_trace(&trace, &rec).is_ok(), "{:?}", check_trace(&trace, &rec));
    }

    #[test]
    fn truncation_splits_depth(n in 2usize..500, seed in any::<u64>(), cut in any::<u32>()) {
        let rec = sample_selection(n, 2, &mut rng_from_seed(seed)).unwrap();
        let t_n = cut % (n as u32 - 1) + 2;
        let view = truncate(&rec, t_n).unwrap();
        for i in 0..2 {
            let full = rrt_core::coalescent::stats_from_flips(&rec, i + 1).unwrap();
            prop_assert_eq!(view.h1[i] + view.h2[i], full.depth);
            prop_assert!(view.sets[i].iter().all(|&j| j >= t_n));
            prop_assert!(view.sets[i].windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn conditional_samples_meet_thresholds(n in 8usize..300, seed in any::<u64>(), raw in prop::collection::vec(0u32..4, 1..3)) {
        let sample = sample_conditional_degrees(n, &raw, &mut rng_from_seed(seed)).unwrap();
        prop_assert!(check_trace(&sample.trace, &sample.record).is_ok());
        for (i, &d) in raw.iter().enumerate() {
            prop_assert!(sample.trace.tree_stats(i as Vertex + 1).unwrap().degree >= d);
        }
        for t_n in [2u32, 3, (n as u32 / 2).max(2), n as u32] {
            let view = truncate(&sample.record, t_n).unwrap();
            prop_assert!(predicate_a(&view.sets, &raw, t_n).unwrap());
        }
    }

    #[test]
    fn affine_roundtrip(center in -1e3f64..1e3, var in 1e-3f64..1e3, x in -1e4f64..1e4) {
        let a = Affine::new(center, var).unwrap();
        prop_assert!((a.invert(a.apply(x)) - x).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn normalisers_center_correctly(m in 4u32..30, d in 0u32..4, label in 3u64..1_000_000) {
        let n = 1u64 << m;
        if (d as f64) < 2.0 * (n as f64).ln() {
            let a = cond_degree_depth(n, d).unwrap();
            prop_assert!(a.apply((n as f64).ln() - d as f64 / 2.0).abs() < 1e-12);
        }
        let b = fixed_label_depth(label).unwrap();
        prop_assert!(b.apply((label as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn ks_statistics_lie_in_unit_interval(values in prop::collection::vec(-50i64..50, 1..200)) {
        let f: Vec<f64> = values.iter().map(|&v| v as f64 / 7.0).collect();
        let ks = ks_distance(&f, normal_cdf).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
        let lat = lattice_ks(&values, lattice_normal_cdf(Affine::new(0.0, 100.0).unwrap())).unwrap();
        prop_assert!((0.0..=1.0).contains(&lat));
    }

    #[test]
    fn replicate_runner_ignores_thread_count(seed in any::<u64>(), reps in 1usize..60, threads in 1usize..6) {
        let draw = |_: u64, rng: &mut rrt_core::SimRng| Ok(rng.random::<u64>());
        let one = run_replicates(seed, DOMAIN_MODEL, reps, Some(1), draw).unwrap();
        let many = run_replicates(seed, DOMAIN_MODEL, reps, Some(threads), draw).unwrap();
        prop_assert_eq!(one, many);
    }
}
