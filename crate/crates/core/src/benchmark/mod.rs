//! The attribute-inference benchmark workflow and its synthetic checks.

mod config;
mod method;
mod planted;
mod run;
mod sanity;

pub use config::{load_config, parse_config, BenchmarkConfig, Dataset, CONFIG_VERSION};
pub use method::{default_alphas, default_markov_times, default_thresholds, MethodKind, MethodSpec};
pub use planted::{generate_planted, Planted, PlantedSpec};
pub use run::{
    histogram_bin, run_benchmark, AccuracyRecord, BenchmarkReport, CellFailure, MethodSummary,
    ACCURACY_HEADER, HISTOGRAM_BINS,
};
pub use sanity::{sanity_check, SanityReport};
