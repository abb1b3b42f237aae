//! Cover algebra: near-duplicate removal, cross-run combination, assignment
//! matrices, cover statistics, and partition agreement.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::detectors::{Cover, Partition};
use crate::error::{Error, Result};

/// Near-duplicate threshold used when combining runs.
pub const COMBINE_EPSILON: f64 = 0.5;

/// Jaccard similarity of two ascending member lists.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
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
    let union = a.len() + b.len() - shared;
    if union == 0 {
        1.0
    } else {
        shared as f64 / union as f64
    }
}

/// Removes every community whose Jaccard similarity with an already retained
/// community of equal or lesser size exceeds `epsilon`.
///
/// Communities are visited in canonical order (ascending size, then member
/// list), so smaller and lexicographically earlier communities win.
pub fn dedup(cover: &Cover, epsilon: f64) -> Result<Cover> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dedup epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let mut kept: Vec<&[usize]> = Vec::new();
    let mut by_node: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut shared: HashMap<usize, usize> = HashMap::new();
    for c in cover.communities() {
        shared.clear();
        for v in c {
            if let Some(ids) = by_node.get(v) {
                for &r in ids {
                    *shared.entry(r).or_insert(0) += 1;
                }
            }
        }
        let similar = shared.iter().any(|(&r, &s)| {
            let union = c.len() + kept[r].len() - s;
            s as f64 / union as f64 > epsilon
        });
        if similar {
            continue;
        }
        let id = kept.len();
        for &v in c {
            by_node.entry(v).or_default().push(id);
        }
        kept.push(c);
    }
    Ok(Cover::new(
        kept.into_iter().map(<[usize]>::to_vec).collect(),
        cover.provenance(),
    ))
}

/// Pools the communities of several runs over the same `n` nodes, drops exact
/// duplicates, then applies [`dedup`] at [`COMBINE_EPSILON`]. The result does
/// not depend on the order of `covers`.
pub fn combine_runs(covers: &[Cover], n: usize) -> Result<Cover> {
    for c in covers {
        if let Some(m) = c.max_member().filter(|&m| m >= n) {
            return Err(Error::UniverseMismatch(m + 1, n));
        }
    }
    let mut tags: Vec<&str> = covers.iter().map(Cover::provenance).collect();
    tags.sort_unstable();
    tags.dedup();
    let pooled = covers
        .iter()
        .flat_map(|c| c.communities().iter().cloned())
        .collect();
    dedup(&Cover::new(pooled, tags.join(" + ")), COMBINE_EPSILON)
}

/// Binary node-by-community membership matrix, stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    rows: usize,
    columns: Vec<Vec<usize>>,
    column_ids: Vec<String>,
}

impl AssignmentMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// Ascending member rows of column `j`.
    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn column_ids(&self) -> &[String] {
        &self.column_ids
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.columns[col].binary_search(&row).is_ok()
    }

    pub fn row(&self, row: usize) -> Vec<u8> {
        (0..self.cols()).map(|j| u8::from(self.get(row, j))).collect()
    }

    pub fn column_sums(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    /// Sparse `row col` lines for every one-entry, column-major.
    pub fn to_triplets(&self) -> String {
        let mut out = String::new();
        for (j, col) in self.columns.iter().enumerate() {
            for i in col {
                let _ = writeln!(out, "{i} {j}");
            }
        }
        out
    }
}

/// Encodes a cover over `n` nodes; column `j` is community `j`.
pub fn assignment_matrix(cover: &Cover, n: usize) -> Result<AssignmentMatrix> {
    if let Some(m) = cover.max_member().filter(|&m| m >= n) {
        return Err(Error::NodeOutOfRange { index: m, n });
    }
    let column_ids = (0..cover.len())
        .map(|j| format!("{}#{j}", cover.provenance()))
        .collect();
    Ok(AssignmentMatrix {
        rows: n,
        columns: cover.communities().to_vec(),
        column_ids,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverStats {
    pub community_count: usize,
    /// Median over covered nodes of the smallest community containing them.
    pub median_smallest: Option<f64>,
    /// Nodes in no community (excluded from the median).
    pub uncovered: usize,
    /// Community size → number of communities of that size.
    pub size_histogram: BTreeMap<usize, usize>,
}

impl CoverStats {
    pub const TSV_HEADER: &'static str = "communities\tmedian_smallest\tuncovered\tsizes";

    /// One TSV line matching [`CoverStats::TSV_HEADER`]; an undefined median is `NA`.
    pub fn to_tsv(&self) -> String {
        let median = self
            .median_smallest
            .map_or_else(|| "NA".to_string(), |m| m.to_string());
        let sizes: Vec<String> = self
            .size_histogram
            .iter()
            .map(|(s, c)| format!("{s}:{c}"))
            .collect();
        format!(
            "{}\t{}\t{}\t{}",
            self.community_count,
            median,
            self.uncovered,
            sizes.join(",")
        )
    }
}

pub fn cover_stats(cover: &Cover, n: usize) -> CoverStats {
    let mut smallest = vec![usize::MAX; n];
    let mut size_histogram = BTreeMap::new();
    for c in cover.communities() {
        *size_histogram.entry(c.len()).or_insert(0) += 1;
        for &v in c {
            if v < n {
                smallest[v] = smallest[v].min(c.len());
            }
        }
    }
    let mut covered: Vec<usize> = smallest.into_iter().filter(|&s| s != usize::MAX).collect();
    covered.sort_unstable();
    let uncovered = n - covered.len();
    let median_smallest = match covered.len() {
        0 => None,
        len if len % 2 == 1 => Some(covered[len / 2] as f64),
        len => Some((covered[len / 2 - 1] + covered[len / 2]) as f64 / 2.0),
    };
    CoverStats {
        community_count: cover.len(),
        median_smallest,
        uncovered,
        size_histogram,
    }
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `2·I(P;Q) / (H(P) + H(Q))`.
///
/// Identical partitions score exactly 1, including the single-community
/// case; otherwise a zero-entropy side scores 0.
pub fn nmi(p: &Partition, q: &Partition) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::UniverseMismatch(p.len(), q.len()));
    }
    if p == q {
        return Ok(1.0);
    }
    let n = p.len() as f64;
    let mut pc = vec![0usize; p.community_count()];
    let mut qc = vec![0usize; q.community_count()];
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    for (&a, &b) in p.assignment().iter().zip(q.assignment()) {
        pc[a] += 1;
        qc[b] += 1;
        *joint.entry((a, b)).or_insert(0) += 1;
    }
    let hp = entropy(pc.iter().copied(), n);
    let hq = entropy(qc.iter().copied(), n);
    if hp == 0.0 || hq == 0.0 {
        return Ok(0.0);
    }
    let hpq = entropy(joint.values().copied(), n);
    let mutual = hp + hq - hpq;
    Ok((2.0 * mutual / (hp + hq)).clamp(0.0, 1.0))
}
