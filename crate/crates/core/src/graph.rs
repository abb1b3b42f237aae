//! Undirected weighted graphs, edge-list I/O, and node attribute tables.
//!
//! Nodes carry arbitrary text labels externally and dense indices `0..n`
//! internally. Ordinary graphs are simple; meta-graphs built by collapsing
//! node blocks may carry self-loop weight. A self-loop of weight `w` adds `w`
//! to the total weight `m` and `2w` to its node's degree, so `Σ k_i = 2m`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
    total_weight: f64,
    meta: bool,
}

/// Incremental graph construction with duplicate and self-loop checks.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<HashMap<usize, f64>>,
    self_loops: Vec<f64>,
    meta: bool,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// A builder that accepts self-loops (used for meta-graphs).
    pub fn meta() -> Self {
        Self {
            meta: true,
            ..Self::default()
        }
    }

    /// Returns the index for `label`, creating the node on first sight.
    pub fn node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        self.adj.push(HashMap::new());
        self.self_loops.push(0.0);
        i
    }

    /// Adds an undirected edge. `line` is only used in error messages.
    pub fn edge(&mut self, u: usize, v: usize, w: f64, line: usize) -> Result<()> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeight { line, weight: w });
        }
        if u == v {
            if !self.meta {
                return Err(Error::SelfLoop {
                    line,
                    node: self.labels[u].clone(),
                });
            }
            if self.self_loops[u] > 0.0 {
                return Err(self.duplicate(u, v, line));
            }
            self.self_loops[u] = w;
            return Ok(());
        }
        if self.adj[u].contains_key(&v) {
            return Err(self.duplicate(u, v, line));
        }
        self.adj[u].insert(v, w);
        self.adj[v].insert(u, w);
        Ok(())
    }

    fn duplicate(&self, u: usize, v: usize, line: usize) -> Error {
        Error::DuplicateEdge {
            line,
            u: self.labels[u].clone(),
            v: self.labels[v].clone(),
        }
    }

    pub fn build(self) -> Graph {
        let adj: Vec<Vec<(usize, f64)>> = self
            .adj
            .into_iter()
            .map(|m| {
                let mut row: Vec<(usize, f64)> = m.into_iter().collect();
                row.sort_unstable_by_key(|&(j, _)| j);
                row
            })
            .collect();
        Graph::assemble(self.labels, self.index, adj, self.self_loops, self.meta)
    }
}

impl Graph {
    fn assemble(
        labels: Vec<String>,
        index: HashMap<String, usize>,
        adj: Vec<Vec<(usize, f64)>>,
        self_loops: Vec<f64>,
        meta: bool,
    ) -> Self {
        let degrees: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(row, s)| row.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * s)
            .collect();
        let total_weight = degrees.iter().sum::<f64>() / 2.0;
        Graph {
            labels,
            index,
            adj,
            self_loops,
            degrees,
            total_weight,
            meta,
        }
    }

    /// Builds a simple unit-weight graph on nodes labelled `"0".."n-1"`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_weighted_edges(n, &weighted)
    }

    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.node(&i.to_string());
        }
        for (line, &(u, v, w)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::NodeOutOfRange { index: x, n });
                }
            }
            b.edge(u, v, w, line + 1)?;
        }
        Ok(b.build())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        let links: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        links + self.self_loops.iter().filter(|&&s| s > 0.0).count()
    }

    /// Total edge weight `m`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Sorted `(neighbor, weight)` pairs, excluding any self-loop.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.self_loops[i]
    }

    pub fn is_meta(&self) -> bool {
        self.meta
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        if u == v {
            let s = self.self_loops[u];
            return (s > 0.0).then_some(s);
        }
        self.adj[u]
            .binary_search_by_key(&v, |&(j, _)| j)
            .ok()
            .map(|p| self.adj[u][p].1)
    }

    /// Every edge once as `(u, v, w)` with `u <= v`, self-loops included.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(move |(u, row)| {
            let s = self.self_loops[u];
            let own = (s > 0.0).then_some((u, u, s));
            own.into_iter()
                .chain(row.iter().filter(move |&&(v, _)| v > u).map(move |&(v, w)| (u, v, w)))
        })
    }

    /// Subgraph on `nodes` plus the mapping from sub-indices back to parent indices.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let n = self.node_count();
        let set: BTreeSet<usize> = nodes.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&x| x >= n) {
            return Err(Error::NodeOutOfRange { index: bad, n });
        }
        let back: Vec<usize> = set.into_iter().collect();
        let mut local = vec![usize::MAX; n];
        for (k, &p) in back.iter().enumerate() {
            local[p] = k;
        }
        let labels: Vec<String> = back.iter().map(|&p| self.labels[p].clone()).collect();
        let index = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let adj = back
            .iter()
            .map(|&p| {
                self.adj[p]
                    .iter()
                    .filter(|&&(q, _)| local[q] != usize::MAX)
                    .map(|&(q, w)| (local[q], w))
                    .collect()
            })
            .collect();
        let self_loops = back.iter().map(|&p| self.self_loops[p]).collect();
        Ok((Graph::assemble(labels, index, adj, self_loops, self.meta), back))
    }

    /// Collapses each block into one node. Cross-block weight sums become
    /// meta-edges; internal weight becomes the block's self-loop. Nodes in no
    /// block are dropped. Meta-node `b` is labelled `b`.
    pub fn build_meta_graph(&self, blocks: &[Vec<usize>]) -> Result<Graph> {
        let n = self.node_count();
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &v in block {
                if v >= n {
                    return Err(Error::NodeOutOfRange { index: v, n });
                }
                if owner[v] != usize::MAX {
                    return Err(Error::OverlappingBlocks(v));
                }
                owner[v] = b;
            }
        }
        let nb = blocks.len();
        let mut cross: Vec<HashMap<usize, f64>> = vec![HashMap::new(); nb];
        let mut loops = vec![0.0; nb];
        for (u, v, w) in self.edges() {
            let (bu, bv) = (owner[u], owner[v]);
            if bu == usize::MAX || bv == usize::MAX {
                continue;
            }
            if bu == bv {
                loops[bu] += w;
            } else {
                *cross[bu].entry(bv).or_insert(0.0) += w;
                *cross[bv].entry(bu).or_insert(0.0) += w;
            }
        }
        let labels: Vec<String> = (0..nb).map(|b| b.to_string()).collect();
        let index = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let adj = cross
            .into_iter()
            .map(|m| {
                let mut row: Vec<(usize, f64)> = m.into_iter().collect();
                row.sort_unstable_by_key(|&(j, _)| j);
                row
            })
            .collect();
        Ok(Graph::assemble(labels, index, adj, loops, true))
    }

    /// Edge list text. Weights are written only when some edge is not unit-weight.
    pub fn to_edge_list(&self) -> String {
        let weighted = self.edges().any(|(_, _, w)| w != 1.0);
        let mut out = String::new();
        for (u, v, w) in self.edges() {
            if weighted {
                let _ = writeln!(out, "{} {} {}", self.labels[u], self.labels[v], w);
            } else {
                let _ = writeln!(out, "{} {}", self.labels[u], self.labels[v]);
            }
        }
        out
    }

    /// `index\tlabel` lines.
    pub fn label_map(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{l}");
        }
        out
    }
}

/// Parses edge-list text: `u v` or `u v w` per line, `#` comments, space or
/// tab separated. Labels get indices in first-seen order.
pub fn parse_edge_list(text: &str, allow_self_loops: bool) -> Result<Graph> {
    let mut b = if allow_self_loops {
        GraphBuilder::meta()
    } else {
        GraphBuilder::new()
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let w = match fields.len() {
            2 => 1.0,
            3 => fields[2].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad weight {:?}", fields[2]),
            })?,
            c => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 or 3 fields, found {c}"),
                })
            }
        };
        let u = b.node(fields[0]);
        let v = b.node(fields[1]);
        b.edge(u, v, w, line)?;
    }
    Ok(b.build())
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, false)
}

/// Like [`load_edge_list`] but accepts self-loops.
pub fn load_meta_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, true)
}

/// Writes `contents` to `path` via a temporary sibling and rename.
pub fn write_atomic(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp~");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents.as_bytes())
        .and_then(|_| f.sync_all())
        .map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// One categorical node attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    /// Sorted category vocabulary.
    pub categories: Vec<String>,
    /// Per-node category index, `None` for missing.
    pub values: Vec<Option<usize>>,
}

impl Attribute {
    pub fn value(&self, node: usize) -> Option<&str> {
        self.values[node].map(|c| self.categories[c].as_str())
    }
}

/// Categorical attributes aligned with a graph's node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    n: usize,
    attributes: Vec<Attribute>,
}

impl AttributeTable {
    /// Builds a table from per-node raw values (`None` = missing).
    pub fn from_columns(n: usize, columns: Vec<(String, Vec<Option<String>>)>) -> Result<Self> {
        let mut attributes = Vec::with_capacity(columns.len());
        for (name, raw) in columns {
            if raw.len() != n {
                return Err(Error::UniverseMismatch(raw.len(), n));
            }
            let categories: Vec<String> = raw
                .iter()
                .flatten()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let values = raw
                .iter()
                .map(|v| v.as_ref().map(|s| categories.binary_search(s).unwrap()))
                .collect();
            attributes.push(Attribute {
                name,
                categories,
                values,
            });
        }
        Ok(AttributeTable { n, attributes })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn get(&self, name: &str) -> Result<&Attribute> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }
}

/// Parses a TSV attribute table whose header names an `id` column; other
/// columns are attributes. Empty cells are missing, and graph nodes without a
/// row get all-missing values.
pub fn parse_attributes(text: &str, graph: &Graph) -> Result<AttributeTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Empty("attribute file has no header".into()))?;
    let header: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    let id_col = header
        .iter()
        .position(|h| h.trim() == "id")
        .ok_or_else(|| Error::MissingColumn("id".into()))?;
    let attr_cols: Vec<usize> = (0..header.len()).filter(|&c| c != id_col).collect();

    let n = graph.node_count();
    let mut raw: Vec<Vec<Option<String>>> = vec![vec![None; n]; attr_cols.len()];
    let mut seen = vec![false; n];
    for (k, line) in lines {
        let cells: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        let label = cells.get(id_col).map(|s| s.trim()).unwrap_or("");
        if label.is_empty() {
            return Err(Error::Parse {
                line: k + 1,
                message: "empty node id".into(),
            });
        }
        let node = graph
            .index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if std::mem::replace(&mut seen[node], true) {
            return Err(Error::DuplicateRow(label.to_string()));
        }
        for (a, &c) in attr_cols.iter().enumerate() {
            let v = cells.get(c).map(|s| s.trim()).unwrap_or("");
            if !v.is_empty() {
                raw[a][node] = Some(v.to_string());
            }
        }
    }
    let columns = attr_cols
        .iter()
        .map(|&c| header[c].trim().to_string())
        .zip(raw)
        .collect();
    AttributeTable::from_columns(n, columns)
}

pub fn load_attributes(path: impl AsRef<Path>, graph: &Graph) -> Result<AttributeTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_attributes(&text, graph)
}


#[cfg(test)]
mod tests {
    use super::fixtures::barbell6;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_simple_path() {
        let g = parse_edge_list("0 1\n1 2", false).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.total_weight(), 2.0);
        assert_eq!(g.degrees(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn rejects_reversed_duplicate() {
        let err = parse_edge_list("a b\nb a", false).unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            parse_edge_list("0 1\n0", false),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 0", false),
            Err(Error::SelfLoop { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 0", false),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 -2.5", false),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(parse_edge_list("0 0 2", true).is_ok());
    }

    #[test]
    fn comments_tabs_and_weights() {
        let g = parse_edge_list("# header\nx\ty\t2.5\n\ny z\n", false).unwrap();
        assert_eq!(g.labels(), &["x", "y", "z"]);
        assert_eq!(g.edge_weight(0, 1), Some(2.5));
        assert_eq!(g.total_weight(), 3.5);
    }

    #[test]
    fn barbell_counts() {
        let g = barbell6();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.total_weight(), 7.0);
        assert_eq!(g.degrees(), &[2.0, 2.0, 3.0, 3.0, 2.0, 2.0]);
    }

    #[test]
    fn induced_subgraph_cases() {
        let g = barbell6();
        let (tri, back) = g.induced_subgraph(&[2, 0, 1]).unwrap();
        assert_eq!(back, vec![0, 1, 2]);
        assert_eq!(tri.total_weight(), 3.0);
        assert_eq!(tri.edge_count(), 3);

        let (empty, back) = g.induced_subgraph(&[]).unwrap();
        assert_eq!(empty.node_count(), 0);
        assert!(back.is_empty());

        let (all, _) = g.induced_subgraph(&[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(all, g);

        assert!(matches!(
            g.induced_subgraph(&[0, 9]),
            Err(Error::NodeOutOfRange { index: 9, .. })
        ));
    }

    #[test]
    fn meta_graph_cases() {
        let g = barbell6();
        let meta = g.build_meta_graph(&[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(meta.node_count(), 2);
        assert_eq!(meta.edge_weight(0, 1), Some(1.0));
        assert_eq!(meta.self_loop(0), 3.0);
        assert_eq!(meta.self_loop(1), 3.0);
        assert_eq!(meta.total_weight(), 7.0);
        let sum: f64 = meta.degrees().iter().sum();
        assert_eq!(sum, 14.0);

        let singles: Vec<Vec<usize>> = (0..6).map(|i| vec![i]).collect();
        let same = g.build_meta_graph(&singles).unwrap();
        let mut a: Vec<_> = g.edges().collect();
        let mut b: Vec<_> = same.edges().collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, b);

        let one = g.build_meta_graph(&[vec![0, 1, 2, 3, 4, 5]]).unwrap();
        assert_eq!(one.node_count(), 1);
        assert_eq!(one.self_loop(0), 7.0);

        assert!(matches!(
            g.build_meta_graph(&[vec![0, 1], vec![1, 2]]),
            Err(Error::OverlappingBlocks(1))
        ));
    }

    #[test]
    fn attributes_parse_and_missing() {
        let g = parse_edge_list("0 1\n1 2", false).unwrap();
        let t = parse_attributes("id\tdorm\n0\tA\n1\t\n", &g).unwrap();
        let dorm = t.get("dorm").unwrap();
        assert_eq!(dorm.value(0), Some("A"));
        assert_eq!(dorm.value(1), None);
        assert_eq!(dorm.value(2), None);
        assert!(matches!(t.get("year"), Err(Error::UnknownAttribute(_))));

        assert!(matches!(
            parse_attributes("id\tdorm\n7\tA\n", &g),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(
            parse_attributes("node\tdorm\n0\tA\n", &g),
            Err(Error::MissingColumn(_))
        ));
        assert!(matches!(
            parse_attributes("id\tdorm\n0\tA\n0\tB\n", &g),
            Err(Error::DuplicateRow(_))
        ));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::btree_set((0..n, 0..n, 1u8..4), 0..30).prop_map(move |es| {
                let mut b = GraphBuilder::new();
                for i in 0..n {
                    b.node(&format!("n{i}"));
                }
                for (u, v, w) in es {
                    let _ = b.edge(u, v, w as f64, 0);
                }
                b.build()
            })
        })
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(g in arb_graph()) {
            let text = g.to_edge_list();
            let back = parse_edge_list(&text, false).unwrap();
            for (u, v, w) in g.edges() {
                let bu = back.index_of(g.label(u)).unwrap();
                let bv = back.index_of(g.label(v)).unwrap();
                prop_assert_eq!(back.edge_weight(bu, bv), Some(w));
            }
            prop_assert_eq!(back.edge_count(), g.edge_count());
            let sum: f64 = g.degrees().iter().sum();
            prop_assert!((sum - 2.0 * g.total_weight()).abs() <= 1e-9 * sum.max(1.0));
        }

        #[test]
        fn meta_graph_conserves_weight(g in arb_graph(), cut in 0usize..12) {
            let n = g.node_count();
            let cut = cut.min(n);
            let blocks = vec![(0..cut).collect::<Vec<_>>(), (cut..n).collect()];
            let meta = g.build_meta_graph(&blocks).unwrap();
            prop_assert!((meta.total_weight() - g.total_weight()).abs() < 1e-9);
            let (sub, _) = g.induced_subgraph(&blocks[1]).unwrap();
            let complement: Vec<Vec<usize>> = (0..sub.node_count()).map(|i| vec![i]).collect();
            let m2 = sub.build_meta_graph(&complement).unwrap();
            prop_assert!(m2.edges().all(|(_, _, w)| w.is_finite() && w >= 0.0));
        }
    }
}
