use crate::detectors::Partition;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub(crate) fn check_markov_time(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Markov time must lie in (0, 1], got {t}"
        )))
    }
}

/// Markov-time modularity `r(t) = (1 - t) + Σ_c [t·e_c - a_c²]`, where `e_c`
/// is the fraction of edge weight inside community `c` (self-loops counted
/// once) and `a_c` its fraction of total degree. `r(1)` is Newman modularity.
/// A graph without edges scores `1 - t`.
pub fn parameterized_modularity(graph: &Graph, partition: &Partition, t: f64) -> Result<f64> {
    check_markov_time(t)?;
    if partition.len() != graph.node_count() {
        return Err(Error::UniverseMismatch(partition.len(), graph.node_count()));
    }
    let m = graph.total_weight();
    if m == 0.0 {
        return Ok(1.0 - t);
    }
    let k = partition.community_count();
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for (v, &c) in partition.assignment().iter().enumerate() {
        degree[c] += graph.degree(v);
    }
    for (u, v, w) in graph.edges() {
        if partition.community_of(u) == partition.community_of(v) {
            internal[partition.community_of(u)] += w;
        }
    }
    let sum: f64 = internal
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| {
            let a = d / (2.0 * m);
            t * e / m - a * a
        })
        .sum();
    Ok((1.0 - t) + sum)
}

/// Newman modularity, `r(1)`.
pub fn modularity(graph: &Graph, partition: &Partition) -> Result<f64> {
    parameterized_modularity(graph, partition, 1.0)
}
