//! Greedy Clique Expansion.
//!
//! Maximal cliques seed candidate communities, largest first. Each seed grows
//! one node at a time, always taking the frontier node that maximizes
//! `F(S) = k_in / (k_in + k_out)^α`, and stops once no addition raises F.
//! Seeds and grown communities that nearly duplicate an accepted community
//! are dropped. Edge weights act as multiplicities in `k_in` and `k_out`.

use std::collections::{HashMap, HashSet};

use crate::detectors::{canonical_cmp, Cover, ResolutionParams};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Two communities are near-duplicates when
/// `1 - |A ∩ B| / min(|A|, |B|)` falls below this.
pub const NEAR_DUPLICATE_DISTANCE: f64 = 0.25;

const MIN_SEED: usize = 4;

/// `k_in / (k_in + k_out)^α` with `k_in` twice the internal weight and
/// `k_out` the boundary weight of `members`.
pub fn fitness(graph: &Graph, members: &[usize], alpha: f64) -> f64 {
    let mut inside = vec![false; graph.node_count()];
    for &v in members {
        inside[v] = true;
    }
    let mut k_in = 0.0;
    let mut volume = 0.0;
    for &v in members {
        volume += graph.degree(v);
        k_in += 2.0 * graph.self_loop(v);
        k_in += graph
            .neighbors(v)
            .iter()
            .filter(|&&(u, _)| inside[u])
            .map(|&(_, w)| w)
            .sum::<f64>();
    }
    if volume == 0.0 {
        0.0
    } else {
        k_in / volume.powf(alpha)
    }
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Maximal cliques with at least `min_size` nodes (Bron–Kerbosch with
/// pivoting over a degeneracy ordering). Each clique is ascending; the list
/// is in canonical order.
pub fn maximal_cliques(graph: &Graph, min_size: usize) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let nbrs: Vec<Vec<usize>> = (0..n)
        .map(|v| graph.neighbors(v).iter().map(|&(u, _)| u).collect())
        .collect();

    // degeneracy order via repeated min-degree removal
    let mut deg: Vec<usize> = nbrs.iter().map(Vec::len).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[deg[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut position = vec![0usize; n];
    let mut d: usize = 0;
    for pos in 0..n {
        d = d.saturating_sub(1);
        let v = loop {
            while buckets[d].is_empty() {
                d += 1;
            }
            let v = buckets[d].pop().unwrap();
            if !removed[v] && deg[v] == d {
                break v;
            }
        };
        removed[v] = true;
        position[v] = pos;
        for &u in &nbrs[v] {
            if !removed[u] {
                deg[u] -= 1;
                buckets[deg[u]].push(u);
            }
        }
    }

    let mut out = Vec::new();
    let mut r = Vec::new();
    for v in 0..n {
        let p: Vec<usize> = nbrs[v].iter().copied().filter(|&u| position[u] > position[v]).collect();
        let x: Vec<usize> = nbrs[v].iter().copied().filter(|&u| position[u] < position[v]).collect();
        r.push(v);
        expand_cliques(&nbrs, &mut r, p, x, min_size, &mut out);
        r.pop();
    }
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort_unstable_by(|a, b| canonical_cmp(a, b));
    out
}

fn expand_cliques(
    nbrs: &[Vec<usize>],
    r: &mut Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    min_size: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() && r.len() >= min_size {
            out.push(r.clone());
        }
        return;
    }
    if r.len() + p.len() < min_size {
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| (sorted_intersection(&p, &nbrs[u]).len(), std::cmp::Reverse(u)))
        .unwrap();
    let candidates: Vec<usize> = p
        .iter()
        .copied()
        .filter(|v| nbrs[pivot].binary_search(v).is_err())
        .collect();
    for v in candidates {
        r.push(v);
        expand_cliques(
            nbrs,
            r,
            sorted_intersection(&p, &nbrs[v]),
            sorted_intersection(&x, &nbrs[v]),
            min_size,
            out,
        );
        r.pop();
        p.retain(|&u| u != v);
        let at = x.binary_search(&v).unwrap_err();
        x.insert(at, v);
    }
}

/// Accepted communities with an inverted node index for overlap queries.
struct Accepted {
    communities: Vec<Vec<usize>>,
    by_node: HashMap<usize, Vec<usize>>,
}

impl Accepted {
    fn near_duplicate(&self, c: &[usize]) -> bool {
        let mut overlap: HashMap<usize, usize> = HashMap::new();
        for v in c {
            for &a in self.by_node.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                *overlap.entry(a).or_insert(0) += 1;
            }
        }
        overlap.into_iter().any(|(a, shared)| {
            let smaller = c.len().min(self.communities[a].len()) as f64;
            1.0 - shared as f64 / smaller < NEAR_DUPLICATE_DISTANCE
        })
    }

    fn push(&mut self, c: Vec<usize>) {
        let id = self.communities.len();
        for &v in &c {
            self.by_node.entry(v).or_default().push(id);
        }
        self.communities.push(c);
    }
}

/// Grows `seed` greedily; returns the ascending member list and the fitness
/// after each accepted step (seed first).
fn expand(graph: &Graph, seed: &[usize], alpha: f64) -> (Vec<usize>, Vec<f64>) {
    let mut members: Vec<usize> = seed.to_vec();
    let mut inside: HashSet<usize> = seed.iter().copied().collect();
    let mut k_in = 0.0;
    let mut volume = 0.0;
    // weight from each outside neighbor into the set
    let mut frontier: HashMap<usize, f64> = HashMap::new();
    for &v in seed {
        volume += graph.degree(v);
        k_in += 2.0 * graph.self_loop(v);
        for &(u, w) in graph.neighbors(v) {
            if inside.contains(&u) {
                k_in += w;
            } else {
                *frontier.entry(u).or_insert(0.0) += w;
            }
        }
    }
    let mut current = k_in / volume.powf(alpha);
    let mut trace = vec![current];
    loop {
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for (&u, &w) in &frontier {
            let new_in = k_in + 2.0 * w + 2.0 * graph.self_loop(u);
            let new_vol = volume + graph.degree(u);
            let f = new_in / new_vol.powf(alpha);
            let better = match best {
                None => true,
                Some((bu, _, _, bf)) => f > bf || (f == bf && u < bu),
            };
            if better {
                best = Some((u, new_in, new_vol, f));
            }
        }
        let Some((u, new_in, new_vol, f)) = best else { break };
        if f <= current {
            break;
        }
        current = f;
        trace.push(f);
        k_in = new_in;
        volume = new_vol;
        frontier.remove(&u);
        inside.insert(u);
        members.push(u);
        for &(x, w) in graph.neighbors(u) {
            if !inside.contains(&x) {
                *frontier.entry(x).or_insert(0.0) += w;
            }
        }
    }
    members.sort_unstable();
    (members, trace)
}

/// Runs GCE with fitness exponent `params.alpha`.
///
/// Seeds are maximal cliques of at least four nodes, or of at least three
/// when the graph has no 4-clique.
pub fn gce(graph: &Graph, params: &ResolutionParams) -> Result<Cover> {
    let alpha = params.alpha;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    let mut seeds = maximal_cliques(graph, MIN_SEED);
    if seeds.is_empty() {
        seeds = maximal_cliques(graph, MIN_SEED - 1);
        if !seeds.is_empty() {
            log::info!("no 4-cliques; seeding GCE from {} triangles", seeds.len());
        }
    }
    // largest first; canonical order within a size
    seeds.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

    let mut accepted = Accepted {
        communities: Vec::new(),
        by_node: HashMap::new(),
    };
    for seed in &seeds {
        if accepted.near_duplicate(seed) {
            continue;
        }
        let (grown, _) = expand(graph, seed, alpha);
        if accepted.near_duplicate(&grown) {
            continue;
        }
        accepted.push(grown);
    }
    Ok(Cover::new(accepted.communities, format!("gce alpha={alpha}")))
}
