//! Exact enumeration suites: coupling uniformity, single-vertex and product
//! identities, label probabilities, degree probabilities given selection sets.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::RngExt;
use rrt_core::coalescent::{predicate_a, stats_from_flips, CoalescentTrace, SelectionRecord};
use rrt_core::oracle::{
    degree_prob_by_selection, enumerate_chains, exact_conditional_law, exact_label_prob,
    exact_rrt_law, falling_factorial, verify_probonevert, verify_product_form, Condition, ExactPmf,
    OneVertexQuery, VertexEvent,
};
use rrt_core::seed::rng_from_seed;
use rrt_core::{Prob, SimRng, TreeTopology, Vertex};

fn factorial(n: i128) -> i128 {
    (1..=n).product()
}

#[test]
fn chain_counts_match_product_formula() {
    for (n, expected) in [(2, 2), (3, 12), (4, 144), (5, 2880)] {
        assert_eq!(enumerate_chains(n, |_| {}).unwrap(), expected);
    }
}

#[test]
fn coupling_is_uniform_over_increasing_trees() {
    for n in 2..=5usize {
        let law = exact_rrt_law(n).unwrap();
        let trees = factorial(n as i128 - 1);
        assert_eq!(law.len() as i128, trees, "n = {n}");
        assert_eq!(law.total(), Prob::one());
        for (parents, p) in law.iter() {
            assert_eq!(*p, Prob::new(1, trees), "n = {n}, tree {parents:?}");
            let mut full = vec![0];
            full.extend_from_slice(parents);
            assert!(TreeTopology::from_parents(&full).unwrap().is_increasing());
        }
    }
}

#[test]
fn attachment_sequences_cover_each_increasing_tree_once() {
    // all 1 * 2 * 3 choices of parents for vertices 2, 3, 4
    let mut seen = BTreeMap::new();
    for p3 in 1..=2 {
        for p4 in 1..=3 {
            *seen.entry(vec![1, p3, p4]).or_insert(0) += 1;
        }
    }
    let law = exact_rrt_law(4).unwrap();
    assert_eq!(seen.len(), law.len());
    for (parents, count) in &seen {
        assert_eq!(*count, 1);
        assert_eq!(law.prob(parents), Prob::new(1, 6));
    }
}

#[test]
fn expected_depth_of_vertex_four() {
    let law = exact_rrt_law(4).unwrap();
    let mean = law.iter().fold(Prob::zero(), |acc, (parents, p)| {
        let mut full = vec![0];
        full.extend_from_slice(parents);
        let t = TreeTopology::from_parents(&full).unwrap();
        acc + *p * Prob::from(t.depth(4).unwrap() as i128)
    });
    assert_eq!(mean, Prob::new(11, 6));
}

#[test]
fn push_forward_of_uniform_label_matches_flip_statistics() {
    for n in 2..=5usize {
        let inv_n = Prob::new(1, n as i128);
        let mut from_trees: ExactPmf<(u32, u32)> = ExactPmf::default();
        for (parents, p) in exact_rrt_law(n).unwrap().iter() {
            let mut full = vec![0];
            full.extend_from_slice(parents);
            let t = TreeTopology::from_parents(&full).unwrap();
            for v in 1..=n as Vertex {
                from_trees.add((t.in_degree(v).unwrap(), t.depth(v).unwrap()), *p * inv_n);
            }
        }
        let mut from_flips: ExactPmf<(u32, u32)> = ExactPmf::default();
        let count = enumerate_chains(n, |chain| {
            let trace = CoalescentTrace::from_rank_merges(n, chain).unwrap();
            let rec = SelectionRecord::from_trace(&trace, n).unwrap();
            for i in 1..=n {
                let s = stats_from_flips(&rec, i).unwrap();
                from_flips.add((s.degree, s.depth), inv_n);
            }
        })
        .unwrap();
        let from_flips = from_flips.map(|k| *k);
        let scale = Prob::new(1, count as i128);
        assert_eq!(from_trees.len(), from_flips.len(), "n = {n}");
        for (key, p) in from_trees.iter() {
            assert_eq!(*p, from_flips.prob(key) * scale, "n = {n}, key {key:?}");
        }
        assert_eq!(from_trees.total(), Prob::one());
    }
}

fn random_subset(rng: &mut SimRng, lo: u32, hi: u32, max: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (lo..=hi).collect();
    let size = rng.random_range(0..=max.min(pool.len()));
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        let idx = rng.random_range(0..pool.len());
        out.push(pool.swap_remove(idx));
    }
    out
}

fn random_query(rng: &mut SimRng, event: VertexEvent) -> OneVertexQuery {
    let n = rng.random_range(4..=40u32);
    let t_n = rng.random_range(2..=n);
    let steps = random_subset(rng, t_n, n, 12);
    let label = if event == VertexEvent::LabelExactly && !steps.is_empty() && rng.random::<bool>() {
        steps[rng.random_range(0..steps.len())]
    } else {
        rng.random_range(t_n..=n)
    };
    OneVertexQuery {
        n,
        t_n,
        degree: rng.random_range(0..=steps.len() as u32 + 1),
        depth: rng.random_range(0..=steps.len() as u32 + 1),
        steps,
        label,
        event,
    }
}

#[test]
fn single_vertex_closed_forms_match_enumeration() {
    let mut rng = rng_from_seed(11);
    let events = [
        VertexEvent::LabelAtLeast,
        VertexEvent::LabelExactly,
        VertexEvent::NoLabel,
    ];
    let mut nonzero = [0; 3];
    for i in 0..1000 {
        let q = random_query(&mut rng, events[i % 3]);
        let (closed, enumerated) = verify_probonevert(&q).unwrap();
        assert_eq!(closed, enumerated, "{q:?}");
        nonzero[i % 3] += !closed.is_zero() as usize;
    }
    assert!(
        nonzero.iter().all(|&c| c > 50),
        "too few informative instances: {nonzero:?}"
    );
}

#[test]
fn single_vertex_known_cases() {
    let q = OneVertexQuery {
        n: 10,
        t_n: 2,
        steps: vec![],
        degree: 0,
        depth: 0,
        label: 1,
        event: VertexEvent::NoLabel,
    };
    assert_eq!(verify_probonevert(&q).unwrap(), (Prob::one(), Prob::one()));
    for l in 3..=10 {
        let q = OneVertexQuery {
            n: 10,
            t_n: 3,
            steps: vec![l],
            degree: 0,
            depth: 1,
            label: l,
            event: VertexEvent::LabelExactly,
        };
        assert_eq!(
            verify_probonevert(&q).unwrap(),
            (Prob::new(1, 2), Prob::new(1, 2))
        );
    }
}

#[test]
fn product_form_matches_joint_enumeration() {
    let mut rng = rng_from_seed(12);
    let mut nonzero = 0;
    for _ in 0..500 {
        let n = rng.random_range(6..=40u32);
        let t_n = rng.random_range(2..=n - 3);
        let k = rng.random_range(1..=3usize);
        let mut pool: Vec<u32> = (t_n..=n).collect();
        let mut queries = Vec::new();
        for _ in 0..k {
            let size = rng.random_range(0..=(14 / k).min(pool.len()));
            let steps: Vec<u32> = (0..size)
                .map(|_| pool.swap_remove(rng.random_range(0..pool.len())))
                .collect();
            queries.push(OneVertexQuery {
                n,
                t_n,
                degree: rng.random_range(0..=size as u32),
                depth: rng.random_range(0..=size as u32 + 1),
                label: rng.random_range(t_n..=n),
                steps,
                event: VertexEvent::LabelAtLeast,
            });
        }
        let (joint, product) = verify_product_form(&queries).unwrap();
        assert_eq!(joint, product, "{queries:?}");
        nonzero += !joint.is_zero() as usize;
    }
    assert!(nonzero > 50, "only {nonzero} informative instances");
}

#[test]
fn product_form_two_singletons() {
    let q = |s: u32| OneVertexQuery {
        n: 6,
        t_n: 2,
        steps: vec![s],
        degree: 0,
        depth: 1,
        label: 2,
        event: VertexEvent::LabelAtLeast,
    };
    let (joint, product) = verify_product_form(&[q(5), q(4)]).unwrap();
    assert_eq!(joint, product);
    assert_eq!(joint, Prob::new(1, 4));
    assert!(verify_product_form(&[q(5), q(5)]).is_err());
}

#[test]
fn label_probabilities_are_inverse_falling_factorials() {
    for n in 2..=5usize {
        for k in 1..=3.min(n) {
            let mut tuple = vec![1 as Vertex; k];
            loop {
                let mut sorted = tuple.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() == k {
                    let p = exact_label_prob(n, &tuple).unwrap();
                    assert_eq!(
                        p,
                        Prob::new(1, falling_factorial(n as u64, k as u64) as i128),
                        "n = {n}, {tuple:?}"
                    );
                }
                let Some(pos) = tuple.iter().rposition(|&l| (l as usize) < n) else {
                    break;
                };
                tuple[pos] += 1;
                for l in &mut tuple[pos + 1..] {
                    *l = 1;
                }
            }
        }
    }
    assert_eq!(exact_label_prob(3, &[2]).unwrap(), Prob::new(1, 3));
    assert_eq!(exact_label_prob(4, &[1, 4]).unwrap(), Prob::new(1, 12));
    assert_eq!(exact_label_prob(2, &[1, 2]).unwrap(), Prob::new(1, 2));
    assert!(exact_label_prob(4, &[2, 2]).is_err());
}

#[test]
fn predicate_a_is_exactly_the_support() {
    let mut groups = 0;
    for n in 2..=5usize {
        for t_n in 2..=n as u32 {
            for k in 1..=2.min(n) {
                for d1 in 0..n as u32 {
                    for d2 in 0..n as u32 {
                        let degrees: Vec<u32> = [d1, d2][..k].to_vec();
                        for (sets, weight, cond) in
                            degree_prob_by_selection(n, t_n, &degrees).unwrap()
                        {
                            assert!(weight > Prob::zero());
                            let a = predicate_a(&sets, &degrees, t_n).unwrap();
                            assert_eq!(
                                a,
                                !cond.is_zero(),
                                "n = {n}, t_n = {t_n}, d = {degrees:?}, J = {sets:?}"
                            );
                            groups += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(groups > 1000);
}

#[test]
fn degree_probability_given_full_windows() {
    for n in 2..=5usize {
        for t_n in 2..=n as u32 {
            for degrees in [
                vec![1],
                vec![2],
                vec![1, 1],
                vec![2, 1],
                vec![1, 2],
                vec![3],
            ] {
                if degrees.len() > n {
                    continue;
                }
                let target = Prob::new(1, 1i128 << degrees.iter().sum::<u32>());
                for (sets, _, cond) in degree_prob_by_selection(n, t_n, &degrees).unwrap() {
                    if !predicate_a(&sets, &degrees, t_n).unwrap() {
                        continue;
                    }
                    let full = sets
                        .iter()
                        .zip(&degrees)
                        .all(|(s, &d)| s.len() >= d as usize);
                    if full || t_n == 2 {
                        assert_eq!(
                            cond, target,
                            "n = {n}, t_n = {t_n}, d = {degrees:?}, J = {sets:?}"
                        );
                    } else {
                        assert!(
                            cond <= target,
                            "n = {n}, t_n = {t_n}, d = {degrees:?}, J = {sets:?}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn conditional_laws_sum_to_one() {
    for n in 2..=5usize {
        for cond in [
            Condition::DegreeAtLeast(vec![1]),
            Condition::DegreeAtLeast(vec![1, 0]),
            Condition::Labels(vec![n as Vertex]),
        ] {
            if let Condition::DegreeAtLeast(d) = &cond {
                if d.len() > n {
                    continue;
                }
            }
            let law = exact_conditional_law(n, &cond).unwrap();
            assert_eq!(law.total(), Prob::one());
        }
    }
}

#[test]
fn conditional_law_small_cases() {
    let law = exact_conditional_law(3, &Condition::Labels(vec![3])).unwrap();
    let depth = law.map(|s| s.vertices[0].depth);
    assert_eq!(depth.prob(&1), Prob::new(1, 2));
    assert_eq!(depth.prob(&2), Prob::new(1, 2));

    let law = exact_conditional_law(2, &Condition::DegreeAtLeast(vec![1])).unwrap();
    assert_eq!(law.map(|s| s.vertices[0].depth).prob(&0), Prob::one());

    let law = exact_conditional_law(4, &Condition::DegreeAtLeast(vec![2])).unwrap();
    let mut direct: ExactPmf<(u32, Vertex)> = ExactPmf::default();
    enumerate_chains(4, |chain| {
        let t = CoalescentTrace::from_rank_merges(4, chain).unwrap();
        let tree = t.final_tree();
        if tree.in_degree(1).unwrap() >= 2 {
            direct.add((tree.depth(1).unwrap(), t.label(1)), Prob::one());
        }
    })
    .unwrap();
    let direct = direct.normalized().unwrap();
    let from_law = law.map(|s| (s.vertices[0].depth, s.vertices[0].label));
    assert_eq!(from_law.len(), direct.len());
    for (key, p) in direct.iter() {
        assert_eq!(from_law.prob(key), *p, "{key:?}");
    }
    assert!(law.iter().all(|(s, _)| s.vertices[0].degree >= 2));
}
