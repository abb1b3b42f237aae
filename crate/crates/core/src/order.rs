//! Block ordering of an adjacency matrix.
//!
//! Nodes are grouped into blocks by an attribute. Inside each block, nodes
//! are grouped by the communities of the block's induced subgraph. Blocks
//! are grouped by the communities of the weighted meta-graph whose nodes
//! are the blocks. Nodes without a value go last.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::detectors::{louvain, ResolutionParams};
use crate::error::{Error, Result};
use crate::graph::{AttributeTable, Graph};

/// A contiguous run `start..end` of the ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOrdering {
    /// `order[position]` is the node shown at that position.
    pub order: Vec<usize>,
    /// One span per attribute value, in display order.
    pub blocks: Vec<Span>,
    /// One span per meta-community, labeled `meta0`, `meta1`, ...
    pub meta: Vec<Span>,
}

impl BlockOrdering {
    /// `position[node]`, the inverse permutation.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &v) in self.order.iter().enumerate() {
            pos[v] = p;
        }
        pos
    }

    /// Lines `position label`.
    pub fn order_text(&self, graph: &Graph) -> String {
        let mut out = String::new();
        for (p, &v) in self.order.iter().enumerate() {
            let _ = writeln!(out, "{p} {}", graph.label(v));
        }
        out
    }

    /// Lines `level start end label`, meta spans first.
    pub fn boundaries_text(&self) -> String {
        let mut out = String::new();
        for (level, spans) in [("meta", &self.meta), ("block", &self.blocks)] {
            for s in spans {
                let _ = writeln!(out, "{level} {} {} {}", s.start, s.end, s.label);
            }
        }
        out
    }
}

/// Compares labels numerically when both are integers, else as text.
pub fn label_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Orders `graph`'s nodes by `attribute` blocks, using Louvain at
/// `params.markov_time` for both the within-block and the meta-graph
/// structure.
pub fn order_adjacency(
    graph: &Graph,
    attrs: &AttributeTable,
    attribute: &str,
    params: &ResolutionParams,
) -> Result<BlockOrdering> {
    let attr = attrs.get(attribute)?;
    if attrs.node_count() != graph.node_count() {
        return Err(Error::UniverseMismatch(attrs.node_count(), graph.node_count()));
    }
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); attr.categories.len()];
    let mut unlabeled = Vec::new();
    for v in 0..graph.node_count() {
        match attr.values[v] {
            Some(c) => blocks[c].push(v),
            None => unlabeled.push(v),
        }
    }
    let kept: Vec<usize> = (0..blocks.len()).filter(|&b| !blocks[b].is_empty()).collect();
    if kept.is_empty() {
        return Err(Error::Empty(format!("no node has a value for {attribute:?}")));
    }
    let blocks: Vec<Vec<usize>> = kept.iter().map(|&b| blocks[b].clone()).collect();
    let block_labels: Vec<&str> = kept.iter().map(|&b| attr.categories[b].as_str()).collect();
    let by_label = |a: &usize, b: &usize| label_cmp(graph.label(*a), graph.label(*b));

    // within-block order
    let inner: Vec<Vec<usize>> = blocks
        .par_iter()
        .map(|members| -> Result<Vec<usize>> {
            let (sub, back) = graph.induced_subgraph(members)?;
            let part = louvain(&sub, params, false)?;
            let mut groups: Vec<Vec<usize>> = part
                .final_partition()
                .communities()
                .into_iter()
                .map(|c| {
                    let mut nodes: Vec<usize> = c.into_iter().map(|i| back[i]).collect();
                    nodes.sort_by(by_label);
                    nodes
                })
                .collect();
            groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| by_label(&a[0], &b[0])));
            Ok(groups.concat())
        })
        .collect::<Result<_>>()?;

    // block order
    let meta_graph = graph.build_meta_graph(&blocks)?;
    let meta = louvain(&meta_graph, params, false)?;
    let block_cmp = |a: &usize, b: &usize| {
        blocks[*b]
            .len()
            .cmp(&blocks[*a].len())
            .then_with(|| label_cmp(block_labels[*a], block_labels[*b]))
    };
    let mut groups: Vec<Vec<usize>> = meta.final_partition().communities();
    for g in &mut groups {
        g.sort_by(block_cmp);
    }
    let weight = |g: &Vec<usize>| g.iter().map(|&b| blocks[b].len()).sum::<usize>();
    groups.sort_by(|a, b| {
        weight(b)
            .cmp(&weight(a))
            .then_with(|| label_cmp(block_labels[a[0]], block_labels[b[0]]))
    });

    let mut order = Vec::with_capacity(graph.node_count());
    let mut block_spans = Vec::new();
    let mut meta_spans = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let start = order.len();
        for &b in g {
            let s = order.len();
            order.extend_from_slice(&inner[b]);
            block_spans.push(Span {
                start: s,
                end: order.len(),
                label: block_labels[b].to_string(),
            });
        }
        meta_spans.push(Span {
            start,
            end: order.len(),
            label: format!("meta{i}"),
        });
    }
    order.extend(unlabeled);
    Ok(BlockOrdering {
        order,
        blocks: block_spans,
        meta: meta_spans,
    })
}
