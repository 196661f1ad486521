//! Monte Carlo campaigns: configuration, trial driver, sweeps and output.
//!
//! Trial `k` of a campaign derives its graph, victim, and noise seeds from
//! `(master_seed, k)` alone, and summaries are aggregated in trial order,
//! so results do not depend on how many workers ran them.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{AutoOr, ExperimentConfig, OutputFormat, ResolvedModel, Strategy};
pub use experiment::{run_experiment, run_sweep, run_trial, ExperimentSummary, SweepAxis, TrialSeeds};
pub use output::{emit_results, emit_results_to_path, read_json_results, CSV_HEADER};
