//! Louvain optimization of Markov-time modularity.
//!
//! Local moving: nodes are visited in ascending index order. A node is taken
//! out of its community and reinserted where the gain
//! `t·k_{i,C}/m - Σ_tot(C)·k_i/(2m²)` is largest, ties going to the lowest
//! community index; an empty community (gain 0) is always a candidate. The
//! node only moves when this beats staying put. Sweeps repeat until one makes
//! no move, then communities are collapsed into a weighted meta-graph and the
//! process restarts, until a level makes no move at all.

use std::collections::BTreeSet;

use crate::detectors::modularity::check_markov_time;
use crate::detectors::{Cover, Partition, ResolutionParams};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Objective improvements at or below this are treated as ties.
const MIN_GAIN: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct LouvainOutcome {
    /// Partition of the original nodes after each level, coarsest last.
    pub levels: Vec<Partition>,
    /// Union of every level's communities when multi-level extraction was requested.
    pub cover: Option<Cover>,
}

impl LouvainOutcome {
    pub fn final_partition(&self) -> &Partition {
        self.levels.last().expect("at least one level")
    }
}

struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        Level {
            adj: (0..n).map(|i| g.neighbors(i).to_vec()).collect(),
            loops: (0..n).map(|i| g.self_loop(i)).collect(),
            degree: g.degrees().to_vec(),
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapses communities (dense labels `0..k`) into single nodes.
    fn aggregate(&self, comm: &[usize], k: usize) -> Level {
        let mut loops = vec![0.0; k];
        let mut degree = vec![0.0; k];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        for i in 0..self.len() {
            let c = comm[i];
            loops[c] += self.loops[i];
            degree[c] += self.degree[i];
            for &(j, w) in &self.adj[i] {
                let d = comm[j];
                if d == c {
                    // each internal edge is seen from both ends
                    loops[c] += w / 2.0;
                } else {
                    rows[c].push((d, w));
                }
            }
        }
        let adj = rows
            .into_iter()
            .map(|mut row| {
                row.sort_unstable_by_key(|&(j, _)| j);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
                for (j, w) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == j => last.1 += w,
                        _ => merged.push((j, w)),
                    }
                }
                merged
            })
            .collect();
        Level { adj, loops, degree }
    }

    /// One local-moving phase starting from singletons. Returns dense
    /// community labels (numbered by first appearance) and whether any node moved.
    fn local_moving(&self, t: f64, m: f64) -> (Vec<usize>, usize, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.degree.clone();
        let mut size = vec![1usize; n];
        let mut empty: BTreeSet<usize> = BTreeSet::new();
        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let two_m2 = 2.0 * m * m;
        let mut any_move = false;

        loop {
            let mut moved = false;
            for i in 0..n {
                let ci = comm[i];
                let ki = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if weight_to[c] == 0.0 {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                tot[ci] -= ki;
                size[ci] -= 1;
                if size[ci] == 0 {
                    empty.insert(ci);
                }
                let gain = |c: usize, w: f64| t * w / m - tot[c] * ki / two_m2;
                let stay = gain(ci, weight_to[ci]);

                let mut best = usize::MAX;
                let mut best_gain = f64::NEG_INFINITY;
                touched.sort_unstable();
                for &c in &touched {
                    if c == ci {
                        continue;
                    }
                    let g = gain(c, weight_to[c]);
                    if g > best_gain {
                        best_gain = g;
                        best = c;
                    }
                }
                if let Some(&e) = empty.iter().next() {
                    if e != ci && (0.0 > best_gain || (0.0 == best_gain && e < best)) {
                        best_gain = 0.0;
                        best = e;
                    }
                }

                let target = if best != usize::MAX && best_gain - stay > MIN_GAIN {
                    moved = true;
                    best
                } else {
                    ci
                };
                comm[i] = target;
                tot[target] += ki;
                if size[target] == 0 {
                    empty.remove(&target);
                }
                size[target] += 1;

                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }

        let mut remap = vec![usize::MAX; n];
        let mut k = 0;
        for c in comm.iter_mut() {
            if remap[*c] == usize::MAX {
                remap[*c] = k;
                k += 1;
            }
            *c = remap[*c];
        }
        (comm, k, any_move)
    }
}

/// Runs Louvain at Markov time `params.markov_time`.
///
/// With `multi_level`, the outcome also carries a cover holding the
/// communities of every level (exact duplicates removed). Edgeless graphs
/// yield the all-singleton partition.
pub fn louvain(graph: &Graph, params: &ResolutionParams, multi_level: bool) -> Result<LouvainOutcome> {
    let t = params.markov_time;
    check_markov_time(t)?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Empty("graph has no nodes".into()));
    }
    let m = graph.total_weight();
    let mut levels = Vec::new();
    if m > 0.0 {
        let mut level = Level::from_graph(graph);
        // membership of each original node in the current level's nodes
        let mut owner: Vec<usize> = (0..n).collect();
        loop {
            let (comm, k, moved) = level.local_moving(t, m);
            if !moved {
                break;
            }
            for o in owner.iter_mut() {
                *o = comm[*o];
            }
            levels.push(Partition::from_assignment(&owner));
            if k == level.len() || k == 1 {
                break;
            }
            level = level.aggregate(&comm, k);
        }
    }
    if levels.is_empty() {
        levels.push(Partition::singletons(n));
    }
    let cover = multi_level.then(|| {
        let all = levels.iter().flat_map(Partition::communities).collect();
        Cover::new(all, format!("louvain t={t} multilevel"))
    });
    Ok(LouvainOutcome { levels, cover })
}
