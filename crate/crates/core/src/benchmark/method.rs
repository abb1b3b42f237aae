use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cover::{combine_runs, dedup};
use crate::detectors::{
    cut_link_dendrogram, gce, import_cover, link_clustering, louvain, Cover, ResolutionParams,
};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default Louvain sweep: t = 0.1, 0.2, ..., 1.0.
pub fn default_markov_times() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Default GCE sweep.
pub fn default_alphas() -> Vec<f64> {
    vec![0.8, 1.0, 1.3, 1.5, 1.7, 2.2]
}

/// Default link-clustering sweep: every integer percent.
pub fn default_thresholds() -> Vec<u32> {
    (1..=100).collect()
}

/// How a method turns a graph into a cover.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodKind {
    /// `all_levels` keeps every aggregation level's communities.
    Louvain { markov_time: f64, all_levels: bool },
    Gce { alpha: f64 },
    LinkCluster { threshold: u32 },
    /// Cover file; `{network}` in the path is replaced by the dataset name.
    Import { path: String },
    LouvainSweep { markov_times: Vec<f64> },
    GceSweep { alphas: Vec<f64> },
    LinkClusterSweep { thresholds: Vec<u32> },
}

/// A named method with an optional near-duplicate pass on its output.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub kind: MethodKind,
    pub dedup: Option<f64>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: expected a number, got {v:?}")))
}

fn parse_u32(key: &str, v: &str) -> Result<u32> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: expected an integer, got {v:?}")))
}

/// Comma-separated integers; `a..b` expands to the inclusive range.
fn parse_u32_list(key: &str, v: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (parse_u32(key, a)?, parse_u32(key, b)?);
                out.extend(a..=b);
            }
            None => out.push(parse_u32(key, part)?),
        }
    }
    Ok(out)
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|p| parse_f64(key, p.trim())).collect()
}

impl MethodSpec {
    /// Builds a method from its kind keyword and `key=value` options.
    pub fn parse(name: &str, kind: &str, options: &[&str]) -> Result<MethodSpec> {
        let mut opts: Vec<(&str, &str)> = Vec::new();
        for o in options {
            let (k, v) = o.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("method option {o:?} is not key=value"))
            })?;
            opts.push((k.trim(), v.trim()));
        }
        let mut taken = vec![false; opts.len()];
        let mut take = |key: &str| {
            opts.iter().enumerate().find(|(_, (k, _))| *k == key).map(|(i, (_, v))| {
                taken[i] = true;
                *v
            })
        };
        let dedup = take("dedup").map(|v| parse_f64("dedup", v)).transpose()?;
        let kind = match kind {
            "louvain" => MethodKind::Louvain {
                markov_time: take("t").map_or(Ok(1.0), |v| parse_f64("t", v))?,
                all_levels: match take("levels") {
                    None | Some("final") => false,
                    Some("all") => true,
                    Some(v) => {
                        return Err(Error::InvalidParameter(format!(
                            "levels must be final or all, got {v:?}"
                        )))
                    }
                },
            },
            "gce" => MethodKind::Gce {
                alpha: take("alpha").map_or(Ok(1.5), |v| parse_f64("alpha", v))?,
            },
            "linkcluster" => MethodKind::LinkCluster {
                threshold: take("threshold").map_or(Ok(50), |v| parse_u32("threshold", v))?,
            },
            "import" => MethodKind::Import {
                path: take("path")
                    .ok_or_else(|| Error::InvalidParameter("import needs path=".into()))?
                    .to_string(),
            },
            "louvain-sweep" => MethodKind::LouvainSweep {
                markov_times: take("t")
                    .map_or(Ok(default_markov_times()), |v| parse_f64_list("t", v))?,
            },
            "gce-sweep" => MethodKind::GceSweep {
                alphas: take("alpha").map_or(Ok(default_alphas()), |v| parse_f64_list("alpha", v))?,
            },
            "linkcluster-sweep" => MethodKind::LinkClusterSweep {
                thresholds: take("threshold")
                    .map_or(Ok(default_thresholds()), |v| parse_u32_list("threshold", v))?,
            },
            other => {
                return Err(Error::InvalidParameter(format!("unknown method kind {other:?}")))
            }
        };
        if let Some(i) = taken.iter().position(|t| !t) {
            return Err(Error::InvalidParameter(format!(
                "option {:?} does not apply to {}",
                opts[i].0,
                kind.keyword()
            )));
        }
        let spec = MethodSpec {
            name: name.to_string(),
            kind,
            dedup,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.name.is_empty() || self.name.contains(|c: char| c.is_whitespace() || c == '/' || c == ',') {
            return bad(format!("method name {:?} must be a plain word", self.name));
        }
        if let Some(e) = self.dedup {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("dedup must lie in [0, 1], got {e}"));
            }
        }
        let t_ok = |t: f64| t > 0.0 && t <= 1.0;
        let p_ok = |p: u32| (1..=100).contains(&p);
        match &self.kind {
            MethodKind::Louvain { markov_time, .. } if !t_ok(*markov_time) => {
                bad(format!("t must lie in (0, 1], got {markov_time}"))
            }
            MethodKind::Gce { alpha } if !(*alpha > 0.0) => bad(format!("alpha must be > 0, got {alpha}")),
            MethodKind::LinkCluster { threshold } if !p_ok(*threshold) => {
                bad(format!("threshold must lie in 1..=100, got {threshold}"))
            }
            MethodKind::LouvainSweep { markov_times: v } if v.is_empty() || !v.iter().all(|&t| t_ok(t)) => {
                bad("sweep times must be non-empty and lie in (0, 1]".into())
            }
            MethodKind::GceSweep { alphas } if alphas.is_empty() || !alphas.iter().all(|&a| a > 0.0) => {
                bad("sweep alphas must be non-empty and positive".into())
            }
            MethodKind::LinkClusterSweep { thresholds } if thresholds.is_empty() || !thresholds.iter().all(|&p| p_ok(p)) => {
                bad("sweep thresholds must be non-empty and lie in 1..=100".into())
            }
            _ => Ok(()),
        }
    }

    /// Runs the method on `graph`. `network` fills `{network}` in import
    /// paths; relative import paths resolve against `base`.
    pub fn detect(&self, graph: &Graph, network: &str, base: &Path, seed: u64) -> Result<Cover> {
        let params = ResolutionParams {
            seed,
            ..ResolutionParams::default()
        };
        let n = graph.node_count();
        let cover = match &self.kind {
            MethodKind::Louvain {
                markov_time,
                all_levels,
            } => {
                let out = louvain(graph, &params.with_markov_time(*markov_time), *all_levels)?;
                match out.cover {
                    Some(c) => c,
                    None => out
                        .final_partition()
                        .to_cover(format!("louvain t={markov_time}")),
                }
            }
            MethodKind::Gce { alpha } => gce(graph, &params.with_alpha(*alpha))?,
            MethodKind::LinkCluster { threshold } => {
                cut_link_dendrogram(&link_clustering(graph)?, *threshold)?
            }
            MethodKind::Import { path } => {
                let path = resolve(base, &path.replace("{network}", network));
                import_cover(&path, graph)?.0
            }
            MethodKind::LouvainSweep { markov_times } => {
                let runs = markov_times
                    .par_iter()
                    .map(|&t| {
                        louvain(graph, &params.with_markov_time(t), true)
                            .map(|o| o.cover.expect("multi-level cover"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                combine_runs(&runs, n)?
            }
            MethodKind::GceSweep { alphas } => {
                let runs = alphas
                    .par_iter()
                    .map(|&a| gce(graph, &params.with_alpha(a)))
                    .collect::<Result<Vec<_>>>()?;
                combine_runs(&runs, n)?
            }
            MethodKind::LinkClusterSweep { thresholds } => {
                let links = link_clustering(graph)?;
                let runs = thresholds
                    .par_iter()
                    .map(|&p| cut_link_dendrogram(&links, p))
                    .collect::<Result<Vec<_>>>()?;
                combine_runs(&runs, n)?
            }
        };
        match self.dedup {
            Some(eps) => dedup(&cover, eps),
            None => Ok(cover),
        }
    }
}

impl MethodKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            MethodKind::Louvain { .. } => "louvain",
            MethodKind::Gce { .. } => "gce",
            MethodKind::LinkCluster { .. } => "linkcluster",
            MethodKind::Import { .. } => "import",
            MethodKind::LouvainSweep { .. } => "louvain-sweep",
            MethodKind::GceSweep { .. } => "gce-sweep",
            MethodKind::LinkClusterSweep { .. } => "linkcluster-sweep",
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name, self.kind.keyword())?;
        let join = |v: Vec<String>| v.join(",");
        match &self.kind {
            MethodKind::Louvain {
                markov_time,
                all_levels,
            } => write!(
                f,
                " t={markov_time} levels={}",
                if *all_levels { "all" } else { "final" }
            )?,
            MethodKind::Gce { alpha } => write!(f, " alpha={alpha}")?,
            MethodKind::LinkCluster { threshold } => write!(f, " threshold={threshold}")?,
            MethodKind::Import { path } => write!(f, " path={path}")?,
            MethodKind::LouvainSweep { markov_times } => {
                write!(f, " t={}", join(markov_times.iter().map(f64::to_string).collect()))?
            }
            MethodKind::GceSweep { alphas } => {
                write!(f, " alpha={}", join(alphas.iter().map(f64::to_string).collect()))?
            }
            MethodKind::LinkClusterSweep { thresholds } => {
                write!(f, " threshold={}", join(thresholds.iter().map(u32::to_string).collect()))?
            }
        }
        if let Some(e) = self.dedup {
            write!(f, " dedup={e}")?;
        }
        Ok(())
    }
}

pub(crate) fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
