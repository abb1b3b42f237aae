//! Python bindings: graphs, covers, the three detectors, cover operations,
//! the classifier, planted graphs, the benchmark runner and block ordering.

use std::path::Path;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use commbench::benchmark::{self, MethodSpec, PlantedSpec};
use commbench::classifier::{self, FeatureMatrix, GbdtParams, LabeledDataset};
use commbench::cover;
use commbench::detectors::{self, Partition, ResolutionParams};
use commbench::graph;
use commbench::order;
use commbench::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::AllCellsFailed(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for commbench::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// An undirected weighted graph.
#[pyclass(frozen)]
struct Graph {
    inner: graph::Graph,
}

#[pymethods]
impl Graph {
    /// Builds a graph on nodes `0..n` from `(u, v)` or `(u, v, weight)` pairs.
    #[new]
    fn new(n: usize, edges: Vec<Vec<f64>>) -> PyResult<Self> {
        let mut list = Vec::with_capacity(edges.len());
        for e in edges {
            let (u, v, w) = match e.as_slice() {
                [u, v] => (*u, *v, 1.0),
                [u, v, w] => (*u, *v, *w),
                _ => return Err(PyValueError::new_err("edges are (u, v) or (u, v, weight)")),
            };
            if u < 0.0 || v < 0.0 || u.fract() != 0.0 || v.fract() != 0.0 {
                return Err(PyValueError::new_err("node ids must be non-negative integers"));
            }
            list.push((u as usize, v as usize, w));
        }
        Ok(Graph {
            inner: graph::Graph::from_weighted_edges(n, &list).py()?,
        })
    }

    /// Reads a whitespace-separated edge list with string labels.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Graph {
            inner: graph::load_edge_list(path).py()?,
        })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn degree(&self, node: usize) -> PyResult<f64> {
        if node >= self.inner.node_count() {
            return Err(PyValueError::new_err(format!("node {node} out of range")));
        }
        Ok(self.inner.degree(node))
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().collect()
    }

    fn to_edge_list(&self) -> String {
        self.inner.to_edge_list()
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

/// A set of possibly overlapping communities over node indices.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Cover {
    inner: detectors::Cover,
}

#[pymethods]
impl Cover {
    #[new]
    #[pyo3(signature = (communities, provenance = "python"))]
    fn new(communities: Vec<Vec<usize>>, provenance: &str) -> Self {
        Cover {
            inner: detectors::Cover::new(communities, provenance),
        }
    }

    /// Reads a cover file (one community of node labels per line).
    #[staticmethod]
    fn load(path: &str, graph: &Graph) -> PyResult<Self> {
        let (inner, _) = detectors::import_cover(path, &graph.inner).py()?;
        Ok(Cover { inner })
    }

    #[getter]
    fn communities(&self) -> Vec<Vec<usize>> {
        self.inner.communities().to_vec()
    }

    #[getter]
    fn provenance(&self) -> String {
        self.inner.provenance().to_string()
    }

    fn to_text(&self, graph: &Graph) -> String {
        self.inner.to_text(&graph.inner)
    }

    /// `(communities, median smallest size or None, uncovered nodes)`.
    fn stats(&self, n: usize) -> (usize, Option<f64>, usize) {
        let s = cover::cover_stats(&self.inner, n);
        (s.community_count, s.median_smallest, s.uncovered)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Cover({} communities, {:?})", self.inner.len(), self.inner.provenance())
    }
}

fn partition(assignment: &[usize]) -> Partition {
    Partition::from_assignment(assignment)
}

/// r(t) of a partition given as one community id per node.
#[pyfunction]
#[pyo3(signature = (graph, assignment, markov_time = 1.0))]
fn modularity(graph: &Graph, assignment: Vec<usize>, markov_time: f64) -> PyResult<f64> {
    detectors::parameterized_modularity(&graph.inner, &partition(&assignment), markov_time).py()
}

/// Louvain levels, finest first, each as one community id per node.
#[pyfunction]
#[pyo3(signature = (graph, markov_time = 1.0))]
fn louvain(graph: &Graph, markov_time: f64) -> PyResult<Vec<Vec<usize>>> {
    let params = ResolutionParams::default().with_markov_time(markov_time);
    let out = detectors::louvain(&graph.inner, &params, true).py()?;
    Ok(out.levels.iter().map(|p| p.assignment().to_vec()).collect())
}

#[pyfunction]
#[pyo3(signature = (graph, alpha = 1.5))]
fn gce(graph: &Graph, alpha: f64) -> PyResult<Cover> {
    let params = ResolutionParams::default().with_alpha(alpha);
    Ok(Cover {
        inner: detectors::gce(&graph.inner, &params).py()?,
    })
}

/// Link clustering cut at `threshold` percent.
#[pyfunction]
#[pyo3(signature = (graph, threshold = 50))]
fn link_cluster(graph: &Graph, threshold: u32) -> PyResult<Cover> {
    let links = detectors::link_clustering(&graph.inner).py()?;
    Ok(Cover {
        inner: detectors::cut_link_dendrogram(&links, threshold).py()?,
    })
}

/// Runs a method by kind keyword, e.g. `detect(g, "louvain-sweep")` or
/// `detect(g, "gce", ["alpha=1.2"])`.
#[pyfunction]
#[pyo3(signature = (graph, kind, options = Vec::new(), seed = 0))]
fn detect(graph: &Graph, kind: &str, options: Vec<String>, seed: u64) -> PyResult<Cover> {
    let opts: Vec<&str> = options.iter().map(String::as_str).collect();
    let spec = MethodSpec::parse(kind, kind, &opts).py()?;
    Ok(Cover {
        inner: spec.detect(&graph.inner, "python", Path::new("."), seed).py()?,
    })
}

#[pyfunction]
#[pyo3(signature = (cover, epsilon = 0.5))]
fn dedup(cover: &Cover, epsilon: f64) -> PyResult<Cover> {
    Ok(Cover {
        inner: cover::dedup(&cover.inner, epsilon).py()?,
    })
}

#[pyfunction]
fn combine_runs(covers: Vec<Cover>, n: usize) -> PyResult<Cover> {
    let runs: Vec<detectors::Cover> = covers.into_iter().map(|c| c.inner).collect();
    Ok(Cover {
        inner: cover::combine_runs(&runs, n).py()?,
    })
}

#[pyfunction]
fn jaccard(a: Vec<usize>, b: Vec<usize>) -> f64 {
    let (mut a, mut b) = (a, b);
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    cover::jaccard(&a, &b)
}

#[pyfunction]
fn nmi(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    cover::nmi(&partition(&a), &partition(&b)).py()
}

/// Samples a planted-partition graph. Returns the graph and the group of
/// each node.
#[pyfunction]
#[pyo3(signature = (n, groups, p_in, p_out, seed = 0, p_mid = None))]
fn planted(
    n: usize,
    groups: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
    p_mid: Option<f64>,
) -> PyResult<(Graph, Vec<usize>)> {
    let mut spec = PlantedSpec::new(n, groups, p_in, p_out, seed);
    if let Some(p) = p_mid {
        spec = spec.with_hierarchy(p);
    }
    let p = benchmark::generate_planted(&spec).py()?;
    Ok((Graph { inner: p.graph }, p.groups.assignment().to_vec()))
}

/// `(nmi, detected, planted)` for a method on a planted graph with the
/// given expected within/across degrees.
#[pyfunction]
#[pyo3(signature = (kind, options = Vec::new(), n = 128, groups = 4, z_in = 14.0, z_out = 2.0, seed = 0))]
fn sanity_check(
    kind: &str,
    options: Vec<String>,
    n: usize,
    groups: usize,
    z_in: f64,
    z_out: f64,
    seed: u64,
) -> PyResult<(f64, usize, usize)> {
    let opts: Vec<&str> = options.iter().map(String::as_str).collect();
    let spec = MethodSpec::parse(kind, kind, &opts).py()?;
    let planted = PlantedSpec::from_degrees(n, groups, z_in, z_out, seed).py()?;
    let r = benchmark::sanity_check(&spec, &planted).py()?;
    Ok((r.nmi, r.detected, r.planted))
}

/// Cross-validated accuracy of the boosted-tree classifier on dense
/// features. Returns one accuracy per evaluated fold.
#[pyfunction]
#[pyo3(signature = (
    rows, labels, k = 10, folds_evaluated = 3, n_trees = 1000, learning_rate = 0.005,
    subsample = 0.4, max_depth = 3, min_samples_split = 5, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn cross_validate(
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    k: usize,
    folds_evaluated: usize,
    n_trees: usize,
    learning_rate: f64,
    subsample: f64,
    max_depth: usize,
    min_samples_split: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    if rows.len() != labels.len() {
        return Err(PyValueError::new_err("rows and labels differ in length"));
    }
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(PyValueError::new_err("rows differ in width"));
    }
    let mut features = FeatureMatrix::new(rows.len());
    for j in 0..width {
        features.push_dense(format!("x{j}"), rows.iter().map(|r| r[j]).collect());
    }
    let mut classes = labels.clone();
    classes.sort();
    classes.dedup();
    let ids = labels
        .iter()
        .map(|l| classes.binary_search(l).unwrap())
        .collect();
    let data = LabeledDataset::new(features, ids, classes).py()?;
    let params = GbdtParams {
        learning_rate,
        n_trees,
        min_samples_split,
        subsample,
        max_depth,
        seed,
    };
    classifier::cross_validate(&data, &params, k, folds_evaluated).py()
}

/// Runs a benchmark config file; returns `(method, attribute, records,
/// mean accuracy)` rows.
#[pyfunction]
#[pyo3(signature = (config, force = false))]
fn run_benchmark(py: Python<'_>, config: &str, force: bool) -> PyResult<Vec<(String, String, usize, f64)>> {
    let cfg = benchmark::load_config(config).py()?;
    let report = py.detach(|| benchmark::run_benchmark(&cfg, force)).py()?;
    Ok(report
        .summary()
        .into_iter()
        .map(|s| (s.method, s.attribute, s.records, s.mean_accuracy))
        .collect())
}

type Spans = Vec<(usize, usize, String)>;

/// Block ordering for adjacency plots: `(order, blocks, meta)` where spans
/// are `(start, end, label)`.
#[pyfunction]
#[pyo3(signature = (graph, attributes, attribute, markov_time = 1.0))]
fn order_adjacency(
    graph: &Graph,
    attributes: &str,
    attribute: &str,
    markov_time: f64,
) -> PyResult<(Vec<usize>, Spans, Spans)> {
    let attrs = graph::load_attributes(attributes, &graph.inner).py()?;
    let params = ResolutionParams::default().with_markov_time(markov_time);
    let o = order::order_adjacency(&graph.inner, &attrs, attribute, &params).py()?;
    let spans = |v: Vec<order::Span>| v.into_iter().map(|s| (s.start, s.end, s.label)).collect();
    Ok((o.order, spans(o.blocks), spans(o.meta)))
}

#[pymodule]
fn commbench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Cover>()?;
    m.add_function(wrap_pyfunction!(modularity, m)?)?;
    m.add_function(wrap_pyfunction!(louvain, m)?)?;
    m.add_function(wrap_pyfunction!(gce, m)?)?;
    m.add_function(wrap_pyfunction!(link_cluster, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(dedup, m)?)?;
    m.add_function(wrap_pyfunction!(combine_runs, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(nmi, m)?)?;
    m.add_function(wrap_pyfunction!(planted, m)?)?;
    m.add_function(wrap_pyfunction!(sanity_check, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(order_adjacency, m)?)?;
    Ok(())
}
