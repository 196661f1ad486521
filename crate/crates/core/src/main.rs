use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use infothresh::attacker::FinalPhaseOrder;
use infothresh::harness::{
    emit_results, emit_results_to_path, run_experiment, run_sweep, AutoOr, ExperimentConfig,
    ExperimentSummary, OutputFormat, Strategy, SweepAxis,
};
use infothresh::stochastics::PriorKind;

#[derive(Parser)]
#[command(name = "infothresh", version, about = "Active de-anonymization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one Monte Carlo campaign.
    Simulate(ModelArgs),
    /// Run one campaign per point along an axis.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<f64>,
    },
    /// Print the bound report for a model without simulating.
    Bounds(ModelArgs),
}

/// Flags override the values read from `--config`.
#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "users")]
    m: Option<usize>,
    #[arg(long = "groups")]
    n: Option<usize>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    edge_flip: Option<f64>,
    #[arg(long)]
    gm_flip: Option<f64>,
    /// uniform | zipf:S | explicit:p1,p2,...
    #[arg(long)]
    prior: Option<PriorKind>,
    /// A value in (0, 1) or `auto`.
    #[arg(long)]
    epsilon: Option<AutoOr<f64>>,
    /// A positive integer or `auto`.
    #[arg(long)]
    steps: Option<AutoOr<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// its | uid-scan
    #[arg(long)]
    strategy: Option<Strategy>,
    /// by_info_value_desc | random | by_prior_desc
    #[arg(long)]
    final_order: Option<FinalPhaseOrder>,
    #[arg(long)]
    workers: Option<usize>,
    /// Reuse trial seeds across sweep points.
    #[arg(long)]
    crn: bool,
    #[arg(long)]
    allow_degenerate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<OutputFormat>,
}

impl ModelArgs {
    fn build(self) -> infothresh::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(m, n, p0, edge_flip, gm_flip, prior, epsilon, steps, trials, strategy, format);
        if let Some(v) = self.seed {
            c.master_seed = v;
        }
        if let Some(v) = self.final_order {
            c.final_phase_order = v;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        c.common_random_numbers |= self.crn;
        c.allow_degenerate |= self.allow_degenerate;
        Ok(c)
    }
}

fn write(summaries: &[ExperimentSummary], cfg: &ExperimentConfig) -> infothresh::Result<()> {
    match &cfg.out {
        Some(path) => emit_results_to_path(summaries, cfg.format, path),
        None => emit_results(summaries, cfg.format, std::io::stdout().lock()),
    }
}

fn run(cli: Cli) -> infothresh::Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.build()?;
            let summary = run_experiment(&cfg)?;
            write(&[summary], &cfg)
        }
        Command::Sweep { model, axis, points } => {
            let cfg = model.build()?;
            let summaries = run_sweep(&cfg, axis, &points)?;
            write(&summaries, &cfg)
        }
        Command::Bounds(args) => {
            let cfg = args.build()?;
            let model = cfg.resolve()?;
            println!("{}", serde_json::to_string_pretty(&model.bounds)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
