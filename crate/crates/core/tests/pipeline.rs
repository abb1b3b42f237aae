mod common;

use std::fs;
use std::path::Path;

use commbench::benchmark::{parse_config, run_benchmark, BenchmarkConfig, HISTOGRAM_BINS};
use commbench::Error;

fn config(root: &Path, extra: &str) -> BenchmarkConfig {
    common::write_planted(root, "a", 1);
    common::write_planted(root, "b", 2);
    let text = format!(
        "version = 1\nseed = 5\nk = 5\nfolds_evaluated = 2\nn_trees = 40\nlearning_rate = 0.1\n\
         output = report\nattributes = block, parity\n\
         dataset = a | a.edges | a.tsv\ndataset = b | b.edges | b.tsv\n\
         method = lv louvain t=1.0\nmethod = lc linkcluster threshold=60\n{extra}"
    );
    parse_config(&text, root).unwrap()
}

fn report_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn record_count_is_networks_methods_attributes_folds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let report = run_benchmark(&cfg, false).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    assert_eq!(report.records.len(), 2 * 2 * 2 * 2);
    assert_eq!(report.cover_stats.len(), 4);

    let out = dir.path().join("report");
    let csv = fs::read_to_string(out.join("accuracy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 16);
    assert!(csv.starts_with("network,method,attribute,fold,accuracy\n"));
    for line in csv.lines().skip(1) {
        let acc = line.rsplit(',').next().unwrap();
        assert_eq!(acc.split('.').nth(1).map(str::len), Some(6), "{line}");
    }
    let summary = report.summary();
    assert_eq!(summary.len(), 4);
    assert!(summary.iter().all(|s| s.records == 4));
    for s in &summary {
        let hist = fs::read_to_string(out.join("hist").join(format!("{}-{}.txt", s.method, s.attribute))).unwrap();
        assert_eq!(hist.lines().count(), HISTOGRAM_BINS);
        let counted: usize = report.histogram(&s.method, &s.attribute).iter().sum();
        assert_eq!(counted, 4);
    }
    assert_eq!(fs::read_to_string(out.join("failures.tsv")).unwrap().lines().count(), 1);
    // block is planted, parity is not
    let mean = |m: &str, a: &str| summary.iter().find(|s| s.method == m && s.attribute == a).unwrap().mean_accuracy;
    assert!(mean("lv", "block") > 0.9);
    assert!(mean("lv", "parity") < 0.75);
}

#[test]
fn reruns_are_byte_identical_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out = dir.path().join("report");
    run_benchmark(&cfg, false).unwrap();
    let first = report_files(&out);

    run_benchmark(&cfg, false).unwrap();
    assert_eq!(report_files(&out), first, "resumed rerun changed the report");

    // a lost cell is recomputed to the same bytes
    fs::remove_file(out.join("cells/b__lc__parity.csv")).unwrap();
    run_benchmark(&cfg, false).unwrap();
    assert_eq!(report_files(&out), first);

    run_benchmark(&cfg, true).unwrap();
    assert_eq!(report_files(&out), first, "forced rerun changed the report");

    // worker count does not leak into results
    let mut one = cfg.clone();
    one.workers = 1;
    one.output = dir.path().join("serial");
    run_benchmark(&one, false).unwrap();
    assert_eq!(
        fs::read(one.output.join("accuracy.csv")).unwrap(),
        fs::read(out.join("accuracy.csv")).unwrap()
    );
}

#[test]
fn failed_cells_are_logged_and_others_kept() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "method = gone import path=missing.cover\n");
    let report = run_benchmark(&cfg, false).unwrap();
    assert_eq!(report.records.len(), 16);
    assert_eq!(report.failures.len(), 4, "{:?}", report.failures);
    let tsv = fs::read_to_string(dir.path().join("report/failures.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 5);
    assert!(tsv.lines().skip(1).all(|l| l.contains("gone")));
}

#[test]
fn all_cells_failed() {
    let dir = tempfile::tempdir().unwrap();
    common::write_planted(dir.path(), "a", 1);
    let text = "version = 1\nattributes = block\ndataset = a | a.edges | a.tsv\n\
                method = gone import path=missing.cover\n";
    let cfg = parse_config(text, dir.path()).unwrap();
    match run_benchmark(&cfg, false) {
        Err(Error::AllCellsFailed(1)) => {}
        other => panic!("expected AllCellsFailed, got {other:?}"),
    }
    assert!(dir.path().join("report/failures.tsv").exists());
}

#[test]
fn unreadable_dataset_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let text = "version = 1\nattributes = block\ndataset = a | nope.edges | nope.tsv\nmethod = lv louvain\n";
    let cfg = parse_config(text, dir.path()).unwrap();
    assert!(matches!(run_benchmark(&cfg, false), Err(Error::Io { .. })));
}

#[test]
fn config_errors() {
    let d = Path::new(".");
    assert!(matches!(parse_config("seed = 1\n", d), Err(Error::Config(_))));
    assert!(matches!(parse_config("version = 2\n", d), Err(Error::Config(_))));
    assert!(matches!(parse_config("version = 1\nbogus = 3\n", d), Err(Error::Config(_))));
    assert!(matches!(parse_config("version = 1\nmethod = x louvain t=-1\n", d), Err(Error::Config(_))));
    assert!(matches!(parse_config("version = 1\ndataset = a | b\n", d), Err(Error::Config(_))));
}
