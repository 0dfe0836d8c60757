mod common;

use common::{hyper_components, is_hypertree};
use cyclewalk::{
    replica_rng, ComponentKind, ConjugacyClass, HyperComponents, HyperOptions, WalkState,
};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn edge_list(max_n: usize) -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
    (3..=max_n).prop_flat_map(|n| {
        let edge = prop::collection::vec(0..n as u32, 2..5).prop_map(|mut e| {
            e.sort_unstable();
            e.dedup();
            e
        });
        (
            Just(n),
            prop::collection::vec(edge, 0..40)
                .prop_map(|es| es.into_iter().filter(|e| e.len() >= 2).collect()),
        )
    })
}

proptest! {
    #[test]
    fn components_and_census_match_brute_force((n, edges) in edge_list(50)) {
        let mut h = HyperComponents::with_options(n, HyperOptions { full_edge_log: true, watch: vec![] });
        for (a, e) in edges.iter().enumerate() {
            let before = h.components();
            let merged = h.add_hyperedge(e).unwrap();
            prop_assert!(merged < e.len());
            prop_assert_eq!(h.components(), before - merged);

            let comps = hyper_components(n, &edges[..=a]);
            prop_assert_eq!(h.components(), comps.len());
            prop_assert_eq!(h.largest() as usize, comps.iter().map(|c| c.0.len()).max().unwrap());
        }
        let comps = hyper_components(n, &edges);
        let mut census = BTreeMap::new();
        let mut good = BTreeMap::new();
        for (verts, es) in &comps {
            let (v, e, x) = h.component_stats(verts[0]);
            prop_assert_eq!(v as usize, verts.len());
            prop_assert_eq!(e as usize, es.len());
            prop_assert!(x >= -1);
            let tree = is_hypertree(verts, es, &edges);
            prop_assert_eq!(h.classify(verts[0]).unwrap() == ComponentKind::Hypertree, tree);
            if tree {
                *census.entry(es.len() as u32).or_insert(0u64) += 1;
                for &i in es {
                    *good.entry(edges[i].len() as u32).or_insert(0u64) += 1;
                }
            }
        }
        prop_assert_eq!(h.hypertree_census(), census);
        prop_assert_eq!(h.good_edge_counts(), good);
        prop_assert_eq!(h.edges().unwrap(), &edges[..]);
        h.audit().map_err(TestCaseError::fail)?;
    }

    #[test]
    fn coupling_holds_after_every_step(
        spec in prop::sample::select(vec!["k2=1", "k3=1", "k4=1", "k2=1,k3=1", "k2=2", "k5=1"]),
        n in 10usize..60,
        seed in any::<u64>(),
    ) {
        let class: ConjugacyClass = spec.parse().unwrap();
        let mut w = WalkState::with_options(class, n, HyperOptions { full_edge_log: true, watch: vec![] }).unwrap();
        let mut rng = replica_rng(seed, 0);
        let mut last_components = n;
        for _ in 0..3 * n {
            w.advance(&mut rng, 1).unwrap();
            w.audit_coupling().map_err(TestCaseError::fail)?;
            let comps = w.hypergraph().components();
            prop_assert!(comps <= last_components);
            prop_assert!(w.permutation().num_cycles() >= comps);
            last_components = comps;
        }
        let edges = w.hypergraph().edges().unwrap().to_vec();
        for (verts, _) in hyper_components(n, &edges) {
            prop_assert!(w.hypergraph().excess(verts[0]) >= -1);
        }
    }
}

#[test]
fn small_fragmentations_are_rare() {
    let n = 10_000;
    let mut w = WalkState::new(ConjugacyClass::transpositions(), n).unwrap();
    let mut rng = replica_rng(11, 0);
    w.advance_to(&mut rng, 2.0).unwrap();
    let rate = w.frag_small_count() as f64 / w.steps() as f64;
    assert!(rate <= 4.0 / (n as f64).sqrt(), "rate {rate}");
}

#[test]
fn poissonized_step_counts() {
    let (n, t, reps) = (1000usize, 1.0, 300u64);
    let counts: Vec<f64> = (0..reps)
        .map(|r| {
            let mut w = WalkState::new(ConjugacyClass::transpositions(), n)
                .unwrap()
                .poissonized(true);
            let mut rng = replica_rng(3, r);
            w.advance_to(&mut rng, t).unwrap();
            assert_eq!(w.time(), t);
            w.steps() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let lambda = t * n as f64;
    assert!((mean - lambda).abs() < 4.0 * (lambda / reps as f64).sqrt(), "mean {mean}");
    assert!((var / lambda - 1.0).abs() < 0.3, "variance {var}");
}
