//! Hierarchical link clustering.
//!
//! Two edges `(k, i)` and `(k, j)` sharing a keystone `k` have similarity
//! `|N⁺(i) ∩ N⁺(j)| / |N⁺(i) ∪ N⁺(j)|` over inclusive neighborhoods. Edges are
//! merged by single linkage in decreasing similarity at height `1 - S`.
//! Edges without a common endpoint are never compared. Weights are ignored.

use std::collections::BTreeMap;

use crate::detectors::{Cover, Dendrogram, Merge};
use crate::error::{Error, Result};
use crate::graph::Graph;

const MIN_NODES: usize = 4;
const MIN_EDGES: usize = 3;

/// A dendrogram over a graph's edges; leaf `i` is `edges[i]`.
#[derive(Debug, Clone)]
pub struct LinkDendrogram {
    pub edges: Vec<(usize, usize)>,
    pub dendrogram: Dendrogram,
}

fn inclusive(graph: &Graph, v: usize) -> Vec<usize> {
    let mut out: Vec<usize> = graph.neighbors(v).iter().map(|&(u, _)| u).collect();
    let at = out.binary_search(&v).unwrap_err();
    out.insert(at, v);
    out
}

/// Returns `(|A ∩ B|, |A ∪ B|)` for ascending slices.
fn overlap(a: &[usize], b: &[usize]) -> (usize, usize) {
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (shared, a.len() + b.len() - shared)
}

/// Similarity of two edges given as endpoint pairs, or `None` when they are
/// identical or share no endpoint.
pub fn edge_similarity(graph: &Graph, a: (usize, usize), b: (usize, usize)) -> Option<f64> {
    let norm = |(u, v): (usize, usize)| (u.min(v), u.max(v));
    let (a, b) = (norm(a), norm(b));
    if a == b {
        return None;
    }
    let (i, j) = if a.0 == b.0 {
        (a.1, b.1)
    } else if a.0 == b.1 {
        (a.1, b.0)
    } else if a.1 == b.0 {
        (a.0, b.1)
    } else if a.1 == b.1 {
        (a.0, b.0)
    } else {
        return None;
    };
    let (shared, union) = overlap(&inclusive(graph, i), &inclusive(graph, j));
    Some(shared as f64 / union as f64)
}

/// Builds the single-linkage edge dendrogram. Self-loops are ignored.
pub fn link_clustering(graph: &Graph) -> Result<LinkDendrogram> {
    let n = graph.node_count();
    let edges: Vec<(usize, usize)> = graph
        .edges()
        .filter(|&(u, v, _)| u != v)
        .map(|(u, v, _)| (u, v))
        .collect();
    if edges.is_empty() {
        return Err(Error::Empty("link clustering needs at least one edge".into()));
    }
    let mut edge_id: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        edge_id[u].push((v, e));
        edge_id[v].push((u, e));
    }
    let hoods: Vec<Vec<usize>> = (0..n).map(|v| inclusive(graph, v)).collect();

    // (distance numerator, union, e1, e2); height = (union - shared) / union
    let mut pairs: Vec<(u32, u32, u32, u32)> = Vec::new();
    for incident in &edge_id {
        for x in 0..incident.len() {
            for y in x + 1..incident.len() {
                let (i, e1) = incident[x];
                let (j, e2) = incident[y];
                let (shared, union) = overlap(&hoods[i], &hoods[j]);
                let (lo, hi) = (e1.min(e2), e1.max(e2));
                pairs.push(((union - shared) as u32, union as u32, lo as u32, hi as u32));
            }
        }
    }
    pairs.sort_unstable_by(|a, b| {
        // compare (a.0/a.1) vs (b.0/b.1) exactly by cross-multiplication
        (a.0 as u64 * b.1 as u64)
            .cmp(&(b.0 as u64 * a.1 as u64))
            .then((a.2, a.3).cmp(&(b.2, b.3)))
    });

    let m = edges.len();
    let mut parent: Vec<usize> = (0..m).collect();
    let mut node_of_root: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = Vec::new();
    for (dist, union, e1, e2) in pairs {
        let a = find(&mut parent, e1 as usize);
        let b = find(&mut parent, e2 as usize);
        if a == b {
            continue;
        }
        let height = dist as f64 / union as f64;
        let id = m + merges.len();
        merges.push(Merge {
            left: node_of_root[a],
            right: node_of_root[b],
            height,
        });
        parent[b] = a;
        node_of_root[a] = id;
        if merges.len() == m - 1 {
            break;
        }
    }
    Ok(LinkDendrogram {
        edges,
        dendrogram: Dendrogram::new(m, merges)?,
    })
}

/// Cuts at height `threshold_percent / 100` and converts each edge cluster to
/// the node set it spans, discarding clusters with fewer than four nodes or
/// fewer than three edges.
pub fn cut_link_dendrogram(links: &LinkDendrogram, threshold_percent: u32) -> Result<Cover> {
    if !(1..=100).contains(&threshold_percent) {
        return Err(Error::InvalidParameter(format!(
            "link-clustering threshold must be in 1..=100, got {threshold_percent}"
        )));
    }
    let cut = threshold_percent as f64 / 100.0;
    let communities = links
        .dendrogram
        .cut(cut)
        .into_iter()
        .filter(|cluster| cluster.len() >= MIN_EDGES)
        .filter_map(|cluster| {
            let mut nodes: BTreeMap<usize, ()> = BTreeMap::new();
            for e in cluster {
                let (u, v) = links.edges[e];
                nodes.insert(u, ());
                nodes.insert(v, ());
            }
            (nodes.len() >= MIN_NODES).then(|| nodes.into_keys().collect())
        })
        .collect();
    Ok(Cover::new(
        communities,
        format!("linkcluster threshold={threshold_percent}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::barbell6;

    #[test]
    fn barbell_similarities() {
        let g = barbell6();
        let s = edge_similarity(&g, (0, 1), (0, 2)).unwrap();
        assert!((s - 0.75).abs() < 1e-12);
        let s = edge_similarity(&g, (2, 3), (0, 2)).unwrap();
        assert!((s - 1.0 / 6.0).abs() < 1e-12);
        let s = edge_similarity(&g, (0, 2), (1, 2)).unwrap();
        assert_eq!(s, 1.0);
        assert_eq!(edge_similarity(&g, (0, 1), (3, 4)), None);
        assert_eq!(edge_similarity(&g, (0, 1), (1, 0)), None);
    }

    #[test]
    fn barbell_dendrogram_shape() {
        let g = barbell6();
        let ld = link_clustering(&g).unwrap();
        assert_eq!(ld.edges.len(), 7);
        let d = &ld.dendrogram;
        assert_eq!(d.merges().len(), 6);
        let heights: Vec<f64> = d.merges().iter().map(|m| m.height).collect();
        assert!(heights.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(heights[..4], [0.0, 0.0, 0.25, 0.25]);
        // triangle edges each form a cluster at 25%
        let clusters = d.cut(0.25);
        assert_eq!(clusters.len(), 3);
    }

    #[test]
    fn barbell_cut_filters_triangles() {
        let ld = link_clustering(&barbell6()).unwrap();
        assert!(cut_link_dendrogram(&ld, 25).unwrap().is_empty());
        let all = cut_link_dendrogram(&ld, 100).unwrap();
        assert_eq!(all.communities(), &[vec![0, 1, 2, 3, 4, 5]]);
        assert!(cut_link_dendrogram(&ld, 0).is_err());
        assert!(cut_link_dendrogram(&ld, 101).is_err());
    }

    #[test]
    fn small_cluster_filter() {
        // path a-b-c: one cluster with 3 nodes and 2 edges, always discarded
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let ld = link_clustering(&g).unwrap();
        assert_eq!(ld.dendrogram.cut(1.0), vec![vec![0, 1]]);
        assert!(cut_link_dendrogram(&ld, 100).unwrap().is_empty());
        // star with 3 leaves: 4 nodes but 3 edges, kept
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let ld = link_clustering(&g).unwrap();
        assert_eq!(cut_link_dendrogram(&ld, 100).unwrap().len(), 1);
    }

    #[test]
    fn disjoint_edges_stay_separate() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let ld = link_clustering(&g).unwrap();
        assert!(ld.dendrogram.merges().is_empty());
        assert_eq!(ld.dendrogram.cut(1.0).len(), 2);
        assert!(link_clustering(&Graph::from_edges(3, &[]).unwrap()).is_err());
    }
}
