mod common;

use proptest::prelude::*;

use commbench::benchmark::MethodSpec;
use commbench::cover::jaccard;
use commbench::detectors::{
    fitness, gce, link_clustering, louvain, parameterized_modularity, Partition, ResolutionParams,
    NEAR_DUPLICATE_DISTANCE,
};
use commbench::graph::Graph;

use common::brute_force_r;

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (3usize..12).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let len = pairs.len();
        (
            Just(n),
            proptest::collection::vec((any::<bool>(), 1u8..4), len).prop_map(move |picks| {
                let mut e: Vec<(usize, usize, f64)> = pairs
                    .iter()
                    .zip(picks)
                    .filter(|(_, (keep, _))| *keep)
                    .map(|(&(u, v), (_, w))| (u, v, w as f64))
                    .collect();
                if e.is_empty() {
                    e.push((0, 1, 1.0));
                }
                e
            }),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    /// After the first local-moving phase no single node can move to another
    /// community, or out on its own, and raise r(t) as computed by the
    /// pair-sum oracle. Aggregation never lowers r. (The final partition
    /// need not be node-optimal; that is a known Louvain property.)
    #[test]
    fn louvain_is_locally_optimal((n, edges) in graph_strategy(), t in prop::sample::select(vec![0.2, 0.5, 1.0])) {
        let g = Graph::from_weighted_edges(n, &edges).unwrap();
        let out = louvain(&g, &ResolutionParams::default().with_markov_time(t), true).unwrap();
        let a = out.levels[0].assignment().to_vec();
        let base = brute_force_r(n, &edges, &a, t);
        let fresh = a.iter().max().unwrap() + 1;
        for v in 0..n {
            for target in 0..=fresh {
                let mut b = a.clone();
                b[v] = target;
                prop_assert!(brute_force_r(n, &edges, &b, t) <= base + 1e-12, "moving {} to {} improves r", v, target);
            }
        }
        let got = parameterized_modularity(&g, &out.levels[0], t).unwrap();
        prop_assert!((got - base).abs() < 1e-12);
        let last = parameterized_modularity(&g, out.final_partition(), t).unwrap();
        prop_assert!(last >= got - 1e-12);
    }

    #[test]
    fn louvain_levels_coarsen((n, edges) in graph_strategy()) {
        let g = Graph::from_weighted_edges(n, &edges).unwrap();
        let out = louvain(&g, &ResolutionParams::default(), true).unwrap();
        let levels = &out.levels;
        for w in levels.windows(2) {
            // each coarser community is a union of finer ones
            for v in 0..n {
                for u in 0..n {
                    if w[0].community_of(u) == w[0].community_of(v) {
                        prop_assert_eq!(w[1].community_of(u), w[1].community_of(v));
                    }
                }
            }
        }
    }

    #[test]
    fn gce_output_is_separated((n, edges) in graph_strategy()) {
        let g = Graph::from_weighted_edges(n, &edges).unwrap();
        let cover = gce(&g, &ResolutionParams::default()).unwrap();
        let cs = cover.communities();
        for a in 0..cs.len() {
            prop_assert!(cs[a].len() >= 3);
            prop_assert!(fitness(&g, &cs[a], 1.5).is_finite());
            for b in a + 1..cs.len() {
                let shared = cs[a].iter().filter(|x| cs[b].contains(x)).count();
                let d = 1.0 - shared as f64 / cs[a].len().min(cs[b].len()) as f64;
                prop_assert!(d >= NEAR_DUPLICATE_DISTANCE, "{:?} and {:?} are near-duplicates", cs[a], cs[b]);
            }
        }
    }

    /// Raising the cut only merges edge clusters.
    #[test]
    fn link_cuts_are_nested((n, edges) in graph_strategy(), lo in 1u32..100, step in 1u32..50) {
        let g = Graph::from_weighted_edges(n, &edges).unwrap();
        let links = link_clustering(&g).unwrap();
        let hi = (lo + step).min(100);
        let fine = links.dendrogram.cut(lo as f64 / 100.0);
        let coarse = links.dendrogram.cut(hi as f64 / 100.0);
        prop_assert!(coarse.len() <= fine.len());
        for f in &fine {
            prop_assert!(coarse.iter().any(|c| f.iter().all(|x| c.contains(x))));
        }
        prop_assert_eq!(links.dendrogram.cut(1.0).len() <= links.dendrogram.cut(0.0).len(), true);
    }
}

#[test]
fn louvain_rejects_bad_markov_time() {
    let g = common::barbell6();
    assert!(louvain(&g, &ResolutionParams::default().with_markov_time(0.0), false).is_err());
    assert!(louvain(&g, &ResolutionParams::default().with_markov_time(f64::NAN), false).is_err());
}

#[test]
fn louvain_is_deterministic() {
    let g = common::barbell6();
    let p = ResolutionParams::default();
    let a = louvain(&g, &p, true).unwrap();
    let b = louvain(&g, &p, true).unwrap();
    assert_eq!(a.levels, b.levels);
    assert_eq!(a.final_partition(), &Partition::from_assignment(&[0, 0, 0, 1, 1, 1]));
}

#[test]
fn sweeps_are_deduplicated() {
    let g = common::barbell6();
    for kind in ["louvain-sweep", "gce-sweep", "linkcluster-sweep"] {
        let m = MethodSpec::parse(kind, kind, &[]).unwrap();
        let cover = m.detect(&g, "barbell", std::path::Path::new("."), 0).unwrap();
        let cs = cover.communities();
        for a in 0..cs.len() {
            for b in a + 1..cs.len() {
                assert!(jaccard(&cs[a], &cs[b]) <= 0.5, "{kind}: {:?} vs {:?}", cs[a], cs[b]);
            }
        }
    }
}

#[test]
fn link_clusters_need_four_nodes_and_three_edges() {
    // K4 has 6 edges over 4 nodes: kept once all edges merge
    let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let links = link_clustering(&k4).unwrap();
    let c = commbench::detectors::cut_link_dendrogram(&links, 100).unwrap();
    assert_eq!(c.communities(), &[vec![0, 1, 2, 3]]);
    // a triangle never reaches four nodes
    let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let c = commbench::detectors::cut_link_dendrogram(&link_clustering(&tri).unwrap(), 100).unwrap();
    assert!(c.is_empty());
}
