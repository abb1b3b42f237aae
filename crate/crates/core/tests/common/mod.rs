#![allow(dead_code)]

use commbench::detectors::Partition;
use commbench::graph::Graph;

/// Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
pub fn barbell6() -> Graph {
    Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)]).unwrap()
}

/// Calls `f` on every set partition of `0..n`, as restricted growth strings.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(a: &mut Vec<usize>, n: usize, max: usize, f: &mut dyn FnMut(&[usize])) {
        if a.len() == n {
            f(a);
            return;
        }
        let next = if a.is_empty() { 0 } else { max + 1 };
        for c in 0..=next {
            a.push(c);
            rec(a, n, max.max(c), f);
            a.pop();
        }
    }
    if n == 0 {
        return;
    }
    rec(&mut Vec::with_capacity(n), n, 0, &mut f);
}

/// r(t) from the pair sum `(1-t) + Σ_{ij same} [t·A_ij/2m - k_i·k_j/4m²]`
/// over a dense adjacency matrix built from raw edges.
pub fn brute_force_r(n: usize, edges: &[(usize, usize, f64)], assignment: &[usize], t: f64) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        a[u][v] += w;
        a[v][u] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut r = 1.0 - t;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                r += t * a[i][j] / two_m - k[i] * k[j] / (two_m * two_m);
            }
        }
    }
    r
}

/// Jaccard similarity of two member lists.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

pub fn partition(assignment: &[usize]) -> Partition {
    Partition::from_assignment(assignment)
}

/// Writes a planted graph and its attribute table (`block`, plus `parity` =
/// node index mod 2) under `dir` as `<name>.edges` / `<name>.tsv`.
pub fn write_planted(dir: &std::path::Path, name: &str, seed: u64) -> (std::path::PathBuf, std::path::PathBuf) {
    use commbench::benchmark::{generate_planted, PlantedSpec};
    let spec = PlantedSpec::from_degrees(64, 4, 10.0, 1.0, seed).unwrap();
    let planted = generate_planted(&spec).unwrap();
    let edges = dir.join(format!("{name}.edges"));
    let attrs = dir.join(format!("{name}.tsv"));
    std::fs::write(&edges, planted.graph.to_edge_list()).unwrap();
    let block = planted.attributes.get("block").unwrap();
    let mut tsv = String::from("id\tblock\tparity\n");
    for v in 0..planted.graph.node_count() {
        tsv += &format!("{}\t{}\t{}\n", planted.graph.label(v), block.value(v).unwrap(), v % 2);
    }
    std::fs::write(&attrs, tsv).unwrap();
    (edges, attrs)
}
