//! Cell orchestration and report emission.
//!
//! A cell is one (network, method, attribute) triple. Detection runs once per
//! (network, method) and feeds every attribute of that pair. Each finished
//! cell writes its fold accuracies to `cells/` atomically; a rerun skips
//! cells whose file exists unless forced. The report is then rebuilt from
//! the cell files in config order, so it does not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::benchmark::config::BenchmarkConfig;
use crate::classifier::{build_dataset_from_features, cross_validate, neighbor_attribute_features, FeatureMatrix};
use crate::cover::{assignment_matrix, cover_stats, CoverStats};
use crate::error::{Error, Result};
use crate::graph::{load_attributes, load_edge_list, write_atomic, AttributeTable, Graph};

pub const ACCURACY_HEADER: &str = "network,method,attribute,fold,accuracy";
pub const HISTOGRAM_BINS: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRecord {
    pub network: String,
    pub method: String,
    pub attribute: String,
    pub fold: usize,
    pub accuracy: f64,
}

/// A cell (or a whole network-method pair when `attribute` is `None`) that
/// produced no records.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub network: String,
    pub method: String,
    pub attribute: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub attribute: String,
    pub records: usize,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    pub records: Vec<AccuracyRecord>,
    /// Per (network, method), in config order.
    pub cover_stats: Vec<(String, String, CoverStats)>,
    pub failures: Vec<CellFailure>,
}

/// Integer-percent bin of an accuracy.
pub fn histogram_bin(accuracy: f64) -> usize {
    (accuracy * 100.0).round().clamp(0.0, 100.0) as usize
}

impl BenchmarkReport {
    /// Mean accuracy per (method, attribute) over all networks and folds, in
    /// first-appearance order.
    pub fn summary(&self) -> Vec<MethodSummary> {
        let mut out: Vec<MethodSummary> = Vec::new();
        for r in &self.records {
            match out
                .iter_mut()
                .find(|s| s.method == r.method && s.attribute == r.attribute)
            {
                Some(s) => {
                    s.records += 1;
                    s.mean_accuracy += r.accuracy;
                }
                None => out.push(MethodSummary {
                    method: r.method.clone(),
                    attribute: r.attribute.clone(),
                    records: 1,
                    mean_accuracy: r.accuracy,
                }),
            }
        }
        for s in &mut out {
            s.mean_accuracy /= s.records as f64;
        }
        out
    }

    /// Record counts per integer-percent bin `0..=100` for one (method, attribute).
    pub fn histogram(&self, method: &str, attribute: &str) -> Vec<usize> {
        let mut bins = vec![0; HISTOGRAM_BINS];
        for r in self
            .records
            .iter()
            .filter(|r| r.method == method && r.attribute == attribute)
        {
            bins[histogram_bin(r.accuracy)] += 1;
        }
        bins
    }

    pub fn mean_accuracy(&self) -> Option<f64> {
        (!self.records.is_empty())
            .then(|| self.records.iter().map(|r| r.accuracy).sum::<f64>() / self.records.len() as f64)
    }

    pub fn accuracy_csv(&self) -> String {
        let mut out = format!("{ACCURACY_HEADER}\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6}",
                r.network, r.method, r.attribute, r.fold, r.accuracy
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("method,attribute,records,mean_accuracy\n");
        for s in self.summary() {
            let _ = writeln!(
                out,
                "{},{},{},{:.6}",
                s.method, s.attribute, s.records, s.mean_accuracy
            );
        }
        out
    }

    pub fn cover_stats_tsv(&self) -> String {
        let mut out = format!("network\tmethod\t{}\n", CoverStats::TSV_HEADER);
        for (net, method, stats) in &self.cover_stats {
            let _ = writeln!(out, "{net}\t{method}\t{}", stats.to_tsv());
        }
        out
    }

    pub fn failures_tsv(&self) -> String {
        let mut out = String::from("network\tmethod\tattribute\terror\n");
        for f in &self.failures {
            let msg = f.message.replace(['\t', '\n'], " ");
            let attr = f.attribute.as_deref().unwrap_or("*");
            let _ = writeln!(out, "{}\t{}\t{attr}\t{msg}", f.network, f.method);
        }
        out
    }

    /// Writes accuracy.csv, summary.csv, cover_stats.tsv, failures.tsv and
    /// one `hist/{method}-{attribute}.txt` per summarized pair.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(dir.join("accuracy.csv"), &self.accuracy_csv())?;
        write_atomic(dir.join("summary.csv"), &self.summary_csv())?;
        write_atomic(dir.join("cover_stats.tsv"), &self.cover_stats_tsv())?;
        write_atomic(dir.join("failures.tsv"), &self.failures_tsv())?;
        for s in self.summary() {
            let mut text = String::new();
            for (bin, count) in self.histogram(&s.method, &s.attribute).iter().enumerate() {
                let _ = writeln!(text, "{bin} {count}");
            }
            write_atomic(
                dir.join("hist").join(format!("{}-{}.txt", s.method, s.attribute)),
                &text,
            )?;
        }
        Ok(())
    }
}

fn cell_path(cells: &Path, network: &str, method: &str, attribute: &str) -> PathBuf {
    cells.join(format!("{network}__{method}__{attribute}.csv"))
}

fn stats_path(cells: &Path, network: &str, method: &str) -> PathBuf {
    cells.join(format!("{network}__{method}.stats"))
}

fn read_cell(path: &Path) -> Result<Vec<AccuracyRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse {
                line: i + 1,
                message: format!("{}: malformed cell record", path.display()),
            };
            let [network, method, attribute, fold, acc] = f.as_slice() else {
                return Err(bad());
            };
            Ok(AccuracyRecord {
                network: network.to_string(),
                method: method.to_string(),
                attribute: attribute.to_string(),
                fold: fold.parse().map_err(|_| bad())?,
                accuracy: acc.parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

fn parse_stats(path: &Path) -> Result<CoverStats> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = || Error::Parse {
        line: 1,
        message: format!("{}: malformed cover statistics", path.display()),
    };
    let f: Vec<&str> = text.trim_end_matches(['\n', '\r']).split('\t').collect();
    let [count, median, uncovered, sizes] = f.as_slice() else {
        return Err(bad());
    };
    let mut size_histogram = BTreeMap::new();
    for pair in sizes.split(',').filter(|s| !s.is_empty()) {
        let (s, c) = pair.split_once(':').ok_or_else(bad)?;
        size_histogram.insert(s.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?);
    }
    Ok(CoverStats {
        community_count: count.parse().map_err(|_| bad())?,
        median_smallest: match *median {
            "NA" => None,
            m => Some(m.parse().map_err(|_| bad())?),
        },
        uncovered: uncovered.parse().map_err(|_| bad())?,
        size_histogram,
    })
}

struct Network {
    name: String,
    graph: Graph,
    attrs: AttributeTable,
}

/// Runs every pending (network, method) pair and its attribute cells.
/// Returns the failures of this run.
fn run_pair(config: &BenchmarkConfig, net: &Network, m: usize, cells: &Path, force: bool) -> Vec<CellFailure> {
    let method = &config.methods[m];
    let stats_file = stats_path(cells, &net.name, &method.name);
    let pending: Vec<&String> = config
        .attributes
        .iter()
        .filter(|a| force || !cell_path(cells, &net.name, &method.name, a).exists())
        .collect();
    let fail = |attribute: Option<&str>, e: &Error| CellFailure {
        network: net.name.clone(),
        method: method.name.clone(),
        attribute: attribute.map(str::to_string),
        message: e.to_string(),
    };
    if pending.is_empty() && stats_file.exists() {
        log::info!("{} / {}: complete, skipped", net.name, method.name);
        return Vec::new();
    }
    let n = net.graph.node_count();
    let cover = match method.detect(&net.graph, &net.name, &config.base_dir, config.seed) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("{} / {}: detection failed: {e}", net.name, method.name);
            return pending.iter().map(|a| fail(Some(a), &e)).collect();
        }
    };
    log::info!("{} / {}: {} communities", net.name, method.name, cover.len());
    let mut failures = Vec::new();
    if let Err(e) = write_atomic(&stats_file, &format!("{}\n", cover_stats(&cover, n).to_tsv())) {
        failures.push(fail(None, &e));
    }
    let base = match assignment_matrix(&cover, n) {
        Ok(m) => FeatureMatrix::from_assignment(&m),
        Err(e) => {
            failures.extend(pending.iter().map(|a| fail(Some(a), &e)));
            return failures;
        }
    };
    for attribute in pending {
        let result = (|| -> Result<()> {
            let mut features = base.clone();
            if config.neighbor_features {
                features.extend(neighbor_attribute_features(&net.graph, &net.attrs, attribute));
            }
            let data = build_dataset_from_features(&features, &net.attrs, attribute)?;
            let acc = cross_validate(&data, &config.gbdt, config.k, config.folds_evaluated)?;
            let mut text = String::new();
            for (fold, a) in acc.iter().enumerate() {
                let _ = writeln!(text, "{},{},{attribute},{fold},{a}", net.name, method.name);
            }
            write_atomic(cell_path(cells, &net.name, &method.name, attribute), &text)
        })();
        if let Err(e) = result {
            log::warn!("{} / {} / {attribute}: {e}", net.name, method.name);
            failures.push(fail(Some(attribute), &e));
        }
    }
    failures
}

/// Runs the benchmark and writes its report to `config.output`.
///
/// Unreadable datasets abort the run. Failures inside a cell are logged to
/// `failures.tsv` and leave other cells unaffected; if no cell produces a
/// record the report is still written and [`Error::AllCellsFailed`] returned.
pub fn run_benchmark(config: &BenchmarkConfig, force: bool) -> Result<BenchmarkReport> {
    config.validate()?;
    let cells = config.output.join("cells");
    fs::create_dir_all(&cells).map_err(|e| Error::io(&cells, e))?;

    let networks = config
        .datasets
        .iter()
        .map(|d| {
            let graph = load_edge_list(&d.edges)?;
            let attrs = load_attributes(&d.attributes, &graph)?;
            Ok(Network {
                name: d.name.clone(),
                graph,
                attrs,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let jobs: Vec<(usize, usize)> = (0..networks.len())
        .flat_map(|d| (0..config.methods.len()).map(move |m| (d, m)))
        .collect();
    let failures: Vec<CellFailure> = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, m)| run_pair(config, &networks[d], m, &cells, force))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });

    let mut report = BenchmarkReport {
        failures,
        ..BenchmarkReport::default()
    };
    for net in &networks {
        for method in &config.methods {
            let stats = stats_path(&cells, &net.name, &method.name);
            if stats.exists() {
                report
                    .cover_stats
                    .push((net.name.clone(), method.name.clone(), parse_stats(&stats)?));
            }
            for attribute in &config.attributes {
                let path = cell_path(&cells, &net.name, &method.name, attribute);
                if path.exists() {
                    report.records.extend(read_cell(&path)?);
                }
            }
        }
    }
    report.write(&config.output)?;
    let total = networks.len() * config.methods.len() * config.attributes.len();
    if report.records.is_empty() {
        return Err(Error::AllCellsFailed(total));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, acc: f64) -> AccuracyRecord {
        AccuracyRecord {
            network: "n".into(),
            method: method.into(),
            attribute: "a".into(),
            fold: 0,
            accuracy: acc,
        }
    }

    #[test]
    fn histogram_rounds_to_percent() {
        let report = BenchmarkReport {
            records: vec![rec("m", 0.473), rec("m", 0.470), rec("m", 0.31), rec("x", 1.0)],
            ..BenchmarkReport::default()
        };
        let h = report.histogram("m", "a");
        assert_eq!(h.len(), 101);
        assert_eq!((h[47], h[31]), (2, 1));
        assert_eq!(h.iter().sum::<usize>(), 3);
        assert_eq!(report.histogram("x", "a")[100], 1);
        assert_eq!(histogram_bin(0.005), 1);
        assert_eq!(histogram_bin(0.0), 0);
    }

    #[test]
    fn summary_and_csv() {
        let report = BenchmarkReport {
            records: vec![rec("m", 0.5), rec("m", 0.25)],
            ..BenchmarkReport::default()
        };
        let s = report.summary();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].records, 2);
        assert!((s[0].mean_accuracy - 0.375).abs() < 1e-15);
        assert_eq!(
            report.accuracy_csv(),
            "network,method,attribute,fold,accuracy\nn,m,a,0,0.500000\nn,m,a,0,0.250000\n"
        );
    }

    #[test]
    fn stats_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.stats");
        let stats = CoverStats {
            community_count: 2,
            median_smallest: None,
            uncovered: 3,
            size_histogram: [(3, 2)].into_iter().collect(),
        };
        fs::write(&p, format!("{}\n", stats.to_tsv())).unwrap();
        assert_eq!(parse_stats(&p).unwrap(), stats);
    }
}
