use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commbench::benchmark::{load_config, run_benchmark, sanity_check, MethodSpec, PlantedSpec};
use commbench::cover::{combine_runs, cover_stats, dedup, CoverStats, COMBINE_EPSILON};
use commbench::detectors::{import_cover, ResolutionParams};
use commbench::graph::{load_attributes, load_edge_list, write_atomic};
use commbench::order::order_adjacency;
use commbench::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_ALL_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "commbench", version, about = "Benchmark community detection by attribute inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect communities and write a cover file.
    Detect {
        graph: PathBuf,
        /// louvain, gce, linkcluster, or a -sweep variant.
        method: String,
        /// Method options such as t=0.5, alpha=1.3, threshold=40, levels=all.
        options: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pool cover files over one graph and remove near-duplicates.
    Combine {
        graph: PathBuf,
        #[arg(required = true)]
        covers: Vec<PathBuf>,
        #[arg(long, default_value_t = COMBINE_EPSILON)]
        epsilon: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a benchmark config and write its report directory.
    Bench {
        config: PathBuf,
        /// Recompute cells that already have results.
        #[arg(long)]
        force: bool,
    },
    /// Score a method on a planted-partition graph.
    Sanity {
        method: String,
        options: Vec<String>,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        groups: usize,
        /// Expected within-group degree.
        #[arg(long, default_value_t = 14.0)]
        z_in: f64,
        /// Expected across-group degree.
        #[arg(long, default_value_t = 2.0)]
        z_out: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print cover statistics.
    Stats { graph: PathBuf, cover: PathBuf },
    /// Order nodes by attribute blocks for adjacency-matrix plots.
    Order {
        graph: PathBuf,
        attributes: PathBuf,
        attribute: String,
        /// Writes PREFIX.order and PREFIX.blocks.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        markov_time: f64,
    },
}

fn emit(output: Option<&Path>, text: &str) -> commbench::Result<()> {
    match output {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> commbench::Result<()> {
    match cli.command {
        Command::Detect {
            graph,
            method,
            options,
            output,
            seed,
        } => {
            let opts: Vec<&str> = options.iter().map(String::as_str).collect();
            let spec = MethodSpec::parse(&method, &method, &opts)?;
            let g = load_edge_list(&graph)?;
            let cover = spec.detect(&g, "", Path::new("."), seed)?;
            emit(output.as_deref(), &cover.to_text(&g))
        }
        Command::Combine {
            graph,
            covers,
            epsilon,
            output,
        } => {
            let g = load_edge_list(&graph)?;
            let runs = covers
                .iter()
                .map(|p| import_cover(p, &g).map(|(c, _)| c))
                .collect::<commbench::Result<Vec<_>>>()?;
            let mut combined = combine_runs(&runs, g.node_count())?;
            if epsilon != COMBINE_EPSILON {
                combined = dedup(&combined, epsilon)?;
            }
            emit(output.as_deref(), &combined.to_text(&g))
        }
        Command::Bench { config, force } => {
            let cfg = load_config(&config)?;
            let report = run_benchmark(&cfg, force)?;
            eprintln!(
                "{} records, {} failures, report in {}",
                report.records.len(),
                report.failures.len(),
                cfg.output.display()
            );
            Ok(())
        }
        Command::Sanity {
            method,
            options,
            n,
            groups,
            z_in,
            z_out,
            seed,
        } => {
            let opts: Vec<&str> = options.iter().map(String::as_str).collect();
            let spec = MethodSpec::parse(&method, &method, &opts)?;
            let planted = PlantedSpec::from_degrees(n, groups, z_in, z_out, seed)?;
            let r = sanity_check(&spec, &planted)?;
            println!("nmi\tdetected\tplanted\tratio");
            println!("{:.6}\t{}\t{}\t{:.6}", r.nmi, r.detected, r.planted, r.ratio());
            Ok(())
        }
        Command::Stats { graph, cover } => {
            let g = load_edge_list(&graph)?;
            let (c, _) = import_cover(&cover, &g)?;
            println!("{}", CoverStats::TSV_HEADER);
            println!("{}", cover_stats(&c, g.node_count()).to_tsv());
            Ok(())
        }
        Command::Order {
            graph,
            attributes,
            attribute,
            output,
            markov_time,
        } => {
            let g = load_edge_list(&graph)?;
            let attrs = load_attributes(&attributes, &g)?;
            let params = ResolutionParams::default().with_markov_time(markov_time);
            let o = order_adjacency(&g, &attrs, &attribute, &params)?;
            let with_ext = |ext: &str| {
                let mut p = output.clone().into_os_string();
                p.push(ext);
                PathBuf::from(p)
            };
            write_atomic(with_ext(".order"), &o.order_text(&g))?;
            write_atomic(with_ext(".blocks"), &o.boundaries_text())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::AllCellsFailed(_) => EXIT_ALL_FAILED,
                Error::InvalidParameter(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            })
        }
    }
}
