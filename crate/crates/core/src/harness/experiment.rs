use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ResolvedModel, Strategy};
use crate::attacker::{run_its, run_uid_scan, AttackTranscript, ScanOrder};
use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::graph::generate_cprb;
use crate::oracle::VictimInstance;
use crate::seeding::{derive, purpose};
use crate::stochastics::sample_victim;

/// Seeds of one trial, all derived from `(master_seed, trial)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub graph: u64,
    pub victim: u64,
    pub noise: u64,
    pub order: u64,
}

impl TrialSeeds {
    pub fn derive(master_seed: u64, trial: u64) -> Self {
        let t = derive(master_seed, trial);
        Self {
            graph: derive(t, purpose::GRAPH),
            victim: derive(t, purpose::VICTIM),
            noise: derive(t, purpose::NOISE),
            order: derive(t, purpose::ORDER),
        }
    }
}

/// Run a single trial and return its full transcript.
pub fn run_trial(
    config: &ExperimentConfig,
    model: &ResolvedModel,
    master_seed: u64,
    trial: u64,
) -> Result<AttackTranscript> {
    let seeds = TrialSeeds::derive(master_seed, trial);
    let pair = generate_cprb(config.n, config.m, &model.edge_joint, seeds.graph)?;
    let victim = sample_victim(&model.prior, seeds.victim);
    let inst = VictimInstance::new(&pair, victim, model.gm, seeds.noise)?;
    match config.strategy {
        Strategy::Its => {
            let mut its = model.its;
            its.order_seed = seeds.order;
            run_its(&pair, &inst, &model.prior, &model.measures, &its)
        }
        Strategy::UidScan => run_uid_scan(&inst, &ScanOrder::Random, seeds.order),
    }
}

/// Aggregated outcome of one campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub m: usize,
    pub n: usize,
    pub p0: f64,
    pub edge_flip: f64,
    pub gm_flip: f64,
    pub prior: String,
    pub epsilon: f64,
    pub l: usize,
    pub trials: usize,
    pub strategy: Strategy,
    pub master_seed: u64,
    pub mean_q: f64,
    pub std_q: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub success_rate: f64,
    /// Trials that ran a verification query in threshold step `i + 1`.
    pub step_attempts: Vec<u64>,
    /// Fraction of those verification queries that were negative.
    pub step_failure_rates: Vec<f64>,
    pub exhaustive_rate: f64,
    pub mean_gm_queries: f64,
    pub bounds: BoundReport,
    pub q_histogram: BTreeMap<usize, u64>,
}

impl ExperimentSummary {
    fn aggregate(config: &ExperimentConfig, model: &ResolvedModel, master_seed: u64, runs: &[AttackTranscript]) -> Self {
        let k = runs.len() as f64;
        let qs: Vec<f64> = runs.iter().map(|t| t.q_count as f64).collect();
        let mean = qs.iter().sum::<f64>() / k;
        let var = if runs.len() > 1 {
            qs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let std = var.sqrt();
        let half = 1.96 * std / k.sqrt();

        let steps = runs.iter().map(|t| t.step_outcomes.len()).max().unwrap_or(0);
        let mut attempts = vec![0u64; steps];
        let mut failures = vec![0u64; steps];
        for t in runs {
            for (i, ok) in t.step_outcomes.iter().enumerate() {
                attempts[i] += 1;
                failures[i] += (!ok) as u64;
            }
        }
        let mut hist = BTreeMap::new();
        for t in runs {
            *hist.entry(t.q_count).or_insert(0) += 1;
        }
        let (epsilon, l) = config.epsilon_and_steps();
        Self {
            m: config.m,
            n: config.n,
            p0: config.p0,
            edge_flip: config.edge_flip,
            gm_flip: config.gm_flip,
            prior: config.prior.to_string(),
            epsilon,
            l,
            trials: runs.len(),
            strategy: config.strategy,
            master_seed,
            mean_q: mean,
            std_q: std,
            ci95_lo: mean - half,
            ci95_hi: mean + half,
            success_rate: runs.iter().filter(|t| t.success).count() as f64 / k,
            step_failure_rates: attempts
                .iter()
                .zip(&failures)
                .map(|(&a, &f)| f as f64 / a as f64)
                .collect(),
            step_attempts: attempts,
            exhaustive_rate: runs.iter().filter(|t| t.exhaustive_phase).count() as f64 / k,
            mean_gm_queries: runs.iter().map(|t| t.gm_count() as f64).sum::<f64>() / k,
            bounds: model.bounds,
            q_histogram: hist,
        }
    }
}

fn run_with_seed(config: &ExperimentConfig, master_seed: u64) -> Result<ExperimentSummary> {
    let model = config.resolve()?;
    let work = || -> Result<Vec<AttackTranscript>> {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|k| run_trial(config, &model, master_seed, k))
            .collect()
    };
    let runs = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(ExperimentSummary::aggregate(config, &model, master_seed, &runs))
}

/// Estimate the expected query count of the configured strategy.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_with_seed(config, config.master_seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Number of users.
    M,
    /// GM channel crossover probability.
    Noise,
    /// Zipf exponent of the victim prior.
    Zipf,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "m" => Ok(SweepAxis::M),
            "noise" => Ok(SweepAxis::Noise),
            "zipf" => Ok(SweepAxis::Zipf),
            _ => Err(format!("unknown sweep axis `{s}`")),
        }
    }
}

/// The config at one sweep point.
pub fn sweep_point(base: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut c = base.clone();
    match axis {
        SweepAxis::M => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::config("points", format!("m = {value} is not a positive integer")));
            }
            c.m = value as usize;
        }
        SweepAxis::Noise => c.gm_flip = value,
        SweepAxis::Zipf => c.prior = crate::stochastics::PriorKind::Zipf(value),
    }
    Ok(c)
}

/// One summary per point. Without common random numbers each point gets
/// its own master seed derived from the base seed and the point index.
pub fn run_sweep(base: &ExperimentConfig, axis: SweepAxis, points: &[f64]) -> Result<Vec<ExperimentSummary>> {
    if points.is_empty() {
        return Err(Error::config("points", "no sweep points given"));
    }
    points
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cfg = sweep_point(base, axis, v)?;
            let seed = if base.common_random_numbers {
                base.master_seed
            } else {
                derive(base.master_seed, i as u64)
            };
            run_with_seed(&cfg, seed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            m: 32,
            n: 600,
            trials: 50,
            epsilon: super::super::config::AutoOr::Value(0.2),
            steps: super::super::config::AutoOr::Value(3),
            ..Default::default()
        }
    }

    #[test]
    fn single_trial_repeatable() {
        let cfg = ExperimentConfig { trials: 1, ..small() };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.std_q, 0.0);
        assert_eq!(a.success_rate, 1.0);
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let a = TrialSeeds::derive(1, 0);
        let b = TrialSeeds::derive(1, 1);
        let c = TrialSeeds::derive(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a.graph, a.noise);
    }

    #[test]
    fn summary_fields_consistent() {
        let s = run_experiment(&small()).unwrap();
        assert_eq!(s.trials, 50);
        assert_eq!(s.q_histogram.values().sum::<u64>(), 50);
        let mean: f64 = s.q_histogram.iter().map(|(q, c)| *q as f64 * *c as f64).sum::<f64>() / 50.0;
        assert!((mean - s.mean_q).abs() < 1e-9);
        assert!(s.ci95_lo <= s.mean_q && s.mean_q <= s.ci95_hi);
        assert_eq!(s.step_attempts[0], 50);
        assert_eq!(s.bounds, small().resolve().unwrap().bounds);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let one = run_experiment(&ExperimentConfig { workers: Some(1), ..small() }).unwrap();
        let four = run_experiment(&ExperimentConfig { workers: Some(4), ..small() }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn sweep_points_and_seeding() {
        let base = ExperimentConfig { trials: 20, ..small() };
        let s = run_sweep(&base, SweepAxis::M, &[16.0, 32.0]).unwrap();
        assert_eq!(s.iter().map(|x| x.m).collect::<Vec<_>>(), vec![16, 32]);
        assert_ne!(s[0].master_seed, s[1].master_seed);
        let crn = ExperimentConfig { common_random_numbers: true, ..base.clone() };
        let s = run_sweep(&crn, SweepAxis::Noise, &[0.0, 0.1]).unwrap();
        assert_eq!(s[0].master_seed, s[1].master_seed);
        assert_eq!(s[1].gm_flip, 0.1);
        assert!(run_sweep(&base, SweepAxis::M, &[2.5]).is_err());
        assert!(run_sweep(&base, SweepAxis::M, &[]).is_err());
    }
}
