//! Planted-partition graphs with known communities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detectors::Partition;
use crate::error::{Error, Result};
use crate::graph::{AttributeTable, Graph, GraphBuilder};

/// Nodes `0..n` split into `groups` equal consecutive groups. Pairs inside a
/// group link with probability `p_in`, other pairs with `p_out`. With
/// `p_mid`, groups `2s` and `2s + 1` form super-group `s` and pairs across
/// the two halves of a super-group link with `p_mid` instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub n: usize,
    pub groups: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub p_mid: Option<f64>,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn new(n: usize, groups: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        PlantedSpec {
            n,
            groups,
            p_in,
            p_out,
            p_mid: None,
            seed,
        }
    }

    /// Probabilities from expected within-group and across-group degrees:
    /// `p_in = z_in / (n/groups - 1)`, `p_out = z_out / (n - n/groups)`.
    pub fn from_degrees(n: usize, groups: usize, z_in: f64, z_out: f64, seed: u64) -> Result<Self> {
        if groups == 0 || !n.is_multiple_of(groups) || n / groups < 2 || groups < 2 {
            return Err(Error::InvalidParameter(format!(
                "cannot split {n} nodes into {groups} groups of at least 2"
            )));
        }
        let size = n / groups;
        let spec = PlantedSpec::new(
            n,
            groups,
            z_in / (size - 1) as f64,
            z_out / (n - size) as f64,
            seed,
        );
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_hierarchy(self, p_mid: f64) -> Self {
        PlantedSpec {
            p_mid: Some(p_mid),
            ..self
        }
    }

    pub fn group_size(&self) -> usize {
        self.n / self.groups
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.groups == 0 || self.n == 0 || !self.n.is_multiple_of(self.groups) {
            return bad(format!("groups ({}) must divide n ({})", self.groups, self.n));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return bad(format!(
                "need 0 <= p_out < p_in <= 1, got p_out={} p_in={}",
                self.p_out, self.p_in
            ));
        }
        if let Some(p_mid) = self.p_mid {
            if !self.groups.is_multiple_of(2) {
                return bad(format!("hierarchy needs an even group count, got {}", self.groups));
            }
            if !(self.p_out <= p_mid && p_mid <= self.p_in) {
                return bad(format!("need p_out <= p_mid <= p_in, got p_mid={p_mid}"));
            }
        }
        Ok(())
    }

    fn probability(&self, gu: usize, gv: usize) -> f64 {
        if gu == gv {
            self.p_in
        } else {
            match self.p_mid {
                Some(p) if gu / 2 == gv / 2 => p,
                _ => self.p_out,
            }
        }
    }

    /// Expected number of edges.
    pub fn expected_edges(&self) -> f64 {
        let s = self.group_size() as f64;
        let g = self.groups;
        let mut total = g as f64 * s * (s - 1.0) / 2.0 * self.p_in;
        for a in 0..g {
            for b in a + 1..g {
                total += s * s * self.probability(a, b);
            }
        }
        total
    }
}

/// A generated graph with its planted ground truth.
#[derive(Debug, Clone)]
pub struct Planted {
    pub graph: Graph,
    pub groups: Partition,
    /// Super-groups when `p_mid` is set.
    pub super_groups: Option<Partition>,
    /// `block` = group index, plus `supergroup` when hierarchical.
    pub attributes: AttributeTable,
}

/// Appends `lo..hi` members linked with probability `p`, by geometric skipping.
fn sample_range(rng: &mut ChaCha8Rng, lo: usize, hi: usize, p: f64, out: &mut Vec<usize>) {
    if p <= 0.0 || lo >= hi {
        return;
    }
    if p >= 1.0 {
        out.extend(lo..hi);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut v = lo;
    loop {
        // 1 - u lies in (0, 1], so the log is finite
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (hi - v) as f64 {
            return;
        }
        v += skip as usize;
        out.push(v);
        v += 1;
        if v >= hi {
            return;
        }
    }
}

/// Samples a planted-partition graph. Node labels are `"0".."n-1"`;
/// isolated nodes are kept. A disconnected result is logged, not rejected.
pub fn generate_planted(spec: &PlantedSpec) -> Result<Planted> {
    spec.validate()?;
    let n = spec.n;
    let size = spec.group_size();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut b = GraphBuilder::new();
    for v in 0..n {
        b.node(&v.to_string());
    }
    let mut partners = Vec::new();
    for u in 0..n {
        let gu = u / size;
        partners.clear();
        sample_range(&mut rng, u + 1, (gu + 1) * size, spec.p_in, &mut partners);
        for gv in gu + 1..spec.groups {
            let p = spec.probability(gu, gv);
            sample_range(&mut rng, gv * size, (gv + 1) * size, p, &mut partners);
        }
        for &v in &partners {
            b.edge(u, v, 1.0, 0)?;
        }
    }
    let graph = b.build();
    let components = component_count(&graph);
    if components > 1 {
        log::info!("planted graph has {components} connected components");
    }

    let group_of: Vec<usize> = (0..n).map(|v| v / size).collect();
    let mut columns = vec![(
        "block".to_string(),
        group_of.iter().map(|g| Some(g.to_string())).collect(),
    )];
    let super_groups = spec.p_mid.map(|_| {
        let sup: Vec<usize> = group_of.iter().map(|g| g / 2).collect();
        columns.push((
            "supergroup".to_string(),
            sup.iter().map(|s| Some(s.to_string())).collect(),
        ));
        Partition::from_assignment(&sup)
    });
    Ok(Planted {
        graph,
        groups: Partition::from_assignment(&group_of),
        super_groups,
        attributes: AttributeTable::from_columns(n, columns)?,
    })
}

fn component_count(g: &Graph) -> usize {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &(u, _) in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    count
}
