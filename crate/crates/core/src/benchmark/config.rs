//! Benchmark configuration: a versioned `key = value` text file.
//!
//! ```text
//! version = 1
//! seed = 7
//! output = report
//! attributes = dorm, year
//! dataset = caltech | caltech.edges | caltech.tsv
//! method = louvain1 louvain t=1.0
//! method = gce-all gce-sweep
//! ```
//!
//! `dataset` and `method` may repeat. Relative paths resolve against the
//! config file's directory. Blank lines and `#` comments are ignored.

use std::fs;
use std::path::{Path, PathBuf};

use crate::benchmark::method::{resolve, MethodSpec};
use crate::classifier::GbdtParams;
use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub edges: PathBuf,
    pub attributes: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub datasets: Vec<Dataset>,
    pub methods: Vec<MethodSpec>,
    pub attributes: Vec<String>,
    pub gbdt: GbdtParams,
    pub k: usize,
    pub folds_evaluated: usize,
    pub output: PathBuf,
    pub seed: u64,
    /// Worker threads for cells; 0 uses all cores.
    pub workers: usize,
    /// Append neighbor-attribute fraction columns to the community features.
    pub neighbor_features: bool,
    /// Directory that relative import paths resolve against.
    pub base_dir: PathBuf,
}

impl BenchmarkConfig {
    /// A config with no datasets, methods, or attributes and default settings.
    pub fn new(output: impl Into<PathBuf>) -> Self {
        BenchmarkConfig {
            datasets: Vec::new(),
            methods: Vec::new(),
            attributes: Vec::new(),
            gbdt: GbdtParams::default(),
            k: 10,
            folds_evaluated: 3,
            output: output.into(),
            seed: 0,
            workers: 0,
            neighbor_features: false,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.datasets.is_empty() {
            return bad("no dataset given".into());
        }
        if self.methods.is_empty() {
            return bad("no method given".into());
        }
        if self.attributes.is_empty() {
            return bad("no attribute given".into());
        }
        if self.k < 2 || self.folds_evaluated == 0 || self.folds_evaluated > self.k {
            return bad(format!(
                "need k >= 2 and 1 <= folds_evaluated <= k, got k={} folds_evaluated={}",
                self.k, self.folds_evaluated
            ));
        }
        let names_unique = |names: Vec<&str>| {
            let mut sorted = names.clone();
            sorted.sort_unstable();
            sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0].to_string())
        };
        if let Some(d) = names_unique(self.datasets.iter().map(|d| d.name.as_str()).collect()) {
            return bad(format!("dataset {d:?} listed twice"));
        }
        if let Some(d) = names_unique(self.methods.iter().map(|m| m.name.as_str()).collect()) {
            return bad(format!("method {d:?} listed twice"));
        }
        if let Some(d) = names_unique(self.attributes.iter().map(String::as_str).collect()) {
            return bad(format!("attribute {d:?} listed twice"));
        }
        for d in &self.datasets {
            if d.name.is_empty() || d.name.contains(|c: char| c.is_whitespace() || c == '/' || c == ',') {
                return bad(format!("dataset name {:?} must be a plain word", d.name));
            }
        }
        self.gbdt.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

fn value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("line {line}: bad value {v:?} for {key}")))
}

/// Parses config text; relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<BenchmarkConfig> {
    let mut cfg = BenchmarkConfig::new(base_dir.join("report"));
    cfg.base_dir = base_dir.to_path_buf();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next().map(|(i, l)| (i, l.split_once('='))) {
        Some((_, Some((k, v)))) if k.trim() == "version" => {
            let v = v.trim();
            if v != CONFIG_VERSION.to_string() {
                return Err(Error::Config(format!("unsupported config version {v}")));
            }
        }
        _ => return Err(Error::Config("first setting must be `version = 1`".into())),
    }

    for (line, l) in lines {
        let (key, v) = l
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Config(format!("line {line}: expected key = value")))?;
        match key {
            "seed" => cfg.seed = value(line, key, v)?,
            "output" => cfg.output = resolve(base_dir, v),
            "k" => cfg.k = value(line, key, v)?,
            "folds_evaluated" => cfg.folds_evaluated = value(line, key, v)?,
            "workers" => cfg.workers = value(line, key, v)?,
            "neighbor_features" => cfg.neighbor_features = value(line, key, v)?,
            "learning_rate" => cfg.gbdt.learning_rate = value(line, key, v)?,
            "n_trees" => cfg.gbdt.n_trees = value(line, key, v)?,
            "min_samples_split" => cfg.gbdt.min_samples_split = value(line, key, v)?,
            "subsample" => cfg.gbdt.subsample = value(line, key, v)?,
            "max_depth" => cfg.gbdt.max_depth = value(line, key, v)?,
            "attributes" => cfg.attributes.extend(
                v.split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_string),
            ),
            "dataset" => {
                let parts: Vec<&str> = v.split('|').map(str::trim).collect();
                let [name, edges, attrs] = parts.as_slice() else {
                    return Err(Error::Config(format!(
                        "line {line}: dataset needs `name | edges | attributes`"
                    )));
                };
                cfg.datasets.push(Dataset {
                    name: name.to_string(),
                    edges: resolve(base_dir, edges),
                    attributes: resolve(base_dir, attrs),
                });
            }
            "method" => {
                let words: Vec<&str> = v.split_whitespace().collect();
                if words.len() < 2 {
                    return Err(Error::Config(format!(
                        "line {line}: method needs `name kind [key=value ...]`"
                    )));
                }
                let m = MethodSpec::parse(words[0], words[1], &words[2..])
                    .map_err(|e| Error::Config(format!("line {line}: {e}")))?;
                cfg.methods.push(m);
            }
            "version" => return Err(Error::Config(format!("line {line}: version given twice"))),
            other => return Err(Error::Config(format!("line {line}: unknown key {other:?}"))),
        }
    }
    cfg.gbdt.seed = cfg.seed;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<BenchmarkConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}
