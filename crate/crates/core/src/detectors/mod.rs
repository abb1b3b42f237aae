//! Community detectors and the partition/cover/dendrogram types they produce.

mod gce;
mod link;
mod louvain;
mod modularity;

pub use gce::{fitness, gce, maximal_cliques, NEAR_DUPLICATE_DISTANCE};
pub use link::{cut_link_dendrogram, edge_similarity, link_clustering, LinkDendrogram};
pub use louvain::{louvain, LouvainOutcome};
pub use modularity::{modularity, parameterized_modularity};

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A disjoint assignment of every node to exactly one community.
///
/// Community indices are dense and numbered by first appearance in node
/// order, so two partitions compare equal iff they group nodes identically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    count: usize,
}

impl Partition {
    pub fn from_assignment(raw: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let assignment: Vec<usize> = raw
            .iter()
            .map(|c| {
                let next = remap.len();
                *remap.entry(*c).or_insert(next)
            })
            .collect();
        Partition {
            count: remap.len(),
            assignment,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            count: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    /// Builds a partition from blocks that must cover `0..n` exactly once.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &v in block {
                if v >= n {
                    return Err(Error::NodeOutOfRange { index: v, n });
                }
                if raw[v] != usize::MAX {
                    return Err(Error::OverlappingBlocks(v));
                }
                raw[v] = b;
            }
        }
        if let Some(v) = raw.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidParameter(format!(
                "node {v} is not in any block"
            )));
        }
        Ok(Self::from_assignment(&raw))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.count
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Member lists indexed by community, each ascending.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn to_cover(&self, provenance: impl Into<String>) -> Cover {
        Cover::new(self.communities(), provenance)
    }

    /// `label community-index` lines.
    pub fn to_text(&self, graph: &Graph) -> String {
        let mut out = String::new();
        for (v, c) in self.assignment.iter().enumerate() {
            let _ = writeln!(out, "{} {}", graph.label(v), c);
        }
        out
    }
}

/// A set of possibly-overlapping, non-empty, pairwise-distinct communities.
///
/// Communities are stored ascending and in canonical order: by size, then by
/// member list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    communities: Vec<Vec<usize>>,
    provenance: String,
}

impl Cover {
    pub fn new(communities: Vec<Vec<usize>>, provenance: impl Into<String>) -> Self {
        Self::with_duplicate_count(communities, provenance).0
    }

    /// Normalizes like [`Cover::new`] and also reports how many exact
    /// duplicates were dropped.
    pub fn with_duplicate_count(
        communities: Vec<Vec<usize>>,
        provenance: impl Into<String>,
    ) -> (Self, usize) {
        let mut communities: Vec<Vec<usize>> = communities
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .filter(|c| !c.is_empty())
            .collect();
        communities.sort_unstable_by(|a, b| canonical_cmp(a, b));
        let before = communities.len();
        communities.dedup();
        let dropped = before - communities.len();
        (
            Cover {
                communities,
                provenance: provenance.into(),
            },
            dropped,
        )
    }

    pub fn empty(provenance: impl Into<String>) -> Self {
        Cover {
            communities: Vec::new(),
            provenance: provenance.into(),
        }
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn into_communities(self) -> Vec<Vec<usize>> {
        self.communities
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn max_member(&self) -> Option<usize> {
        self.communities.iter().filter_map(|c| c.last()).max().copied()
    }

    /// Flattens to a partition: each node goes to the largest community
    /// containing it (ties to the earliest); uncovered nodes become singletons.
    pub fn flatten(&self, n: usize) -> Result<Partition> {
        if let Some(m) = self.max_member().filter(|&m| m >= n) {
            return Err(Error::NodeOutOfRange { index: m, n });
        }
        let mut best: Vec<Option<usize>> = vec![None; n];
        for (ci, c) in self.communities.iter().enumerate() {
            for &v in c {
                match best[v] {
                    Some(b) if self.communities[b].len() >= c.len() => {}
                    _ => best[v] = Some(ci),
                }
            }
        }
        let k = self.communities.len();
        let raw: Vec<usize> = best
            .iter()
            .enumerate()
            .map(|(v, b)| b.unwrap_or(k + v))
            .collect();
        Ok(Partition::from_assignment(&raw))
    }

    /// Cover file text: a `# provenance` header, then one community per line
    /// as space-separated node labels.
    pub fn to_text(&self, graph: &Graph) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.provenance);
        for c in &self.communities {
            let labels: Vec<&str> = c.iter().map(|&v| graph.label(v)).collect();
            let _ = writeln!(out, "{}", labels.join(" "));
        }
        out
    }
}

pub(crate) fn canonical_cmp(a: &[usize], b: &[usize]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Parses cover text against a graph's labels.
///
/// Blank and `#` lines are skipped. Text with no lines at all is an error; a
/// file holding only comment lines is a deliberately empty cover.
pub fn parse_cover(text: &str, graph: &Graph, provenance: &str) -> Result<(Cover, usize)> {
    if text.trim().is_empty() {
        return Err(Error::Empty("cover file".into()));
    }
    let mut communities = Vec::new();
    for line in text.lines() {
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let members = body
            .split_whitespace()
            .map(|l| {
                graph
                    .index_of(l)
                    .ok_or_else(|| Error::UnknownLabel(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        communities.push(members);
    }
    Ok(Cover::with_duplicate_count(communities, provenance))
}

/// Reads an externally computed cover. Returns the cover and the number of
/// exact-duplicate lines dropped.
pub fn import_cover(path: impl AsRef<Path>, graph: &Graph) -> Result<(Cover, usize)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let provenance = format!("import path={}", path.display());
    let (cover, dups) = parse_cover(&text, graph, &provenance)?;
    if dups > 0 {
        log::warn!("{}: dropped {dups} duplicate communities", path.display());
    }
    Ok((cover, dups))
}

/// Merge tree over `leaves` items. Node ids `0..leaves` are leaves; merge `i`
/// creates node `leaves + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: usize,
    merges: Vec<Merge>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

impl Dendrogram {
    pub fn new(leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        let mut used: HashSet<usize> = HashSet::new();
        for (i, m) in merges.iter().enumerate() {
            let id = leaves + i;
            for c in [m.left, m.right] {
                if c >= id || !used.insert(c) {
                    return Err(Error::InvalidParameter(format!(
                        "merge {i} has invalid child {c}"
                    )));
                }
            }
            if !(0.0..=1.0).contains(&m.height) {
                return Err(Error::InvalidParameter(format!(
                    "merge height {} outside [0, 1]",
                    m.height
                )));
            }
        }
        Ok(Dendrogram { leaves, merges })
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Leaf clusters after applying every merge with `height <= cut`, as
    /// ascending leaf lists ordered by smallest leaf.
    pub fn cut(&self, cut: f64) -> Vec<Vec<usize>> {
        let total = self.leaves + self.merges.len();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, m) in self.merges.iter().enumerate() {
            if m.height <= cut {
                let id = self.leaves + i;
                let a = find(&mut parent, m.left);
                let b = find(&mut parent, m.right);
                parent[a] = id;
                parent[b] = id;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for leaf in 0..self.leaves {
            let r = find(&mut parent, leaf);
            groups.entry(r).or_default().push(leaf);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_unstable_by_key(|g| g[0]);
        out
    }

    /// `child1 child2 height` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.merges {
            let _ = writeln!(out, "{} {} {}", m.left, m.right, m.height);
        }
        out
    }
}

/// Resolution settings; each detector reads only its own field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionParams {
    /// Louvain Markov time, in (0, 1].
    pub markov_time: f64,
    /// GCE fitness exponent, > 0.
    pub alpha: f64,
    /// Link-clustering cut, in percent (1..=100).
    pub threshold_percent: u32,
    pub seed: u64,
}

impl Default for ResolutionParams {
    fn default() -> Self {
        ResolutionParams {
            markov_time: 1.0,
            alpha: 1.5,
            threshold_percent: 50,
            seed: 0,
        }
    }
}

impl ResolutionParams {
    pub fn with_markov_time(self, markov_time: f64) -> Self {
        Self {
            markov_time,
            ..self
        }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_threshold(self, threshold_percent: u32) -> Self {
        Self {
            threshold_percent,
            ..self
        }
    }
}
