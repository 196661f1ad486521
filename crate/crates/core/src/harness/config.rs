use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacker::{default_params, FinalPhaseOrder, ItsConfig};
use crate::bounds::{BoundParams, BoundReport};
use crate::error::{Error, Result};
use crate::stochastics::{
    entropy, make_prior, EdgeJointDistribution, InfoMeasures, PriorKind, QueryChannel, VictimPrior,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// A parameter given explicitly or derived from `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Value(T),
    Auto(AutoTag),
}

impl<T> AutoOr<T> {
    pub const AUTO: AutoOr<T> = AutoOr::Auto(AutoTag::Auto);
}

impl<T: std::str::FromStr> std::str::FromStr for AutoOr<T> {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(Self::AUTO)
        } else {
            s.parse()
                .map(AutoOr::Value)
                .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "its")]
    Its,
    #[serde(rename = "uid-scan", alias = "uid_scan")]
    UidScan,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "its" => Ok(Strategy::Its),
            "uid-scan" | "uid_scan" => Ok(Strategy::UidScan),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

/// One Monte Carlo campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub p0: f64,
    /// P(scanned edge != true edge).
    pub edge_flip: f64,
    /// Crossover probability of the GM response channel.
    pub gm_flip: f64,
    pub prior: PriorKind,
    pub epsilon: AutoOr<f64>,
    pub steps: AutoOr<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub strategy: Strategy,
    pub final_phase_order: FinalPhaseOrder,
    /// Reuse the same trial seeds at every sweep point.
    pub common_random_numbers: bool,
    /// Permit ITS on a model with zero mutual information.
    pub allow_degenerate: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 256,
            n: 8192,
            p0: 0.5,
            edge_flip: 0.05,
            gm_flip: 0.05,
            prior: PriorKind::Uniform,
            epsilon: AutoOr::AUTO,
            steps: AutoOr::AUTO,
            trials: 2000,
            master_seed: 1,
            strategy: Strategy::Its,
            final_phase_order: FinalPhaseOrder::ByInfoValueDesc,
            common_random_numbers: false,
            allow_degenerate: false,
            workers: None,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

/// Every derived object a campaign needs, computed once from the config.
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub edge_joint: EdgeJointDistribution,
    pub gm: QueryChannel,
    pub prior: VictimPrior,
    pub measures: InfoMeasures,
    pub entropy: f64,
    pub its: ItsConfig,
    pub bounds: BoundReport,
}

fn unit_interval(field: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::config(field, format!("{v} is not in [0, 1]")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn epsilon_and_steps(&self) -> (f64, usize) {
        let (auto_eps, auto_l) = default_params(self.m);
        let eps = match self.epsilon {
            AutoOr::Value(v) => v,
            AutoOr::Auto(_) => auto_eps,
        };
        let l = match self.steps {
            AutoOr::Value(v) => v,
            AutoOr::Auto(_) => auto_l,
        };
        (eps, l)
    }

    /// Check every field and build the model objects.
    pub fn resolve(&self) -> Result<ResolvedModel> {
        if self.m == 0 {
            return Err(Error::config("m", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        unit_interval("p0", self.p0)?;
        unit_interval("edge_flip", self.edge_flip)?;
        unit_interval("gm_flip", self.gm_flip)?;
        if self.p0 <= 0.0 || self.p0 >= 1.0 {
            return Err(Error::config("p0", "must lie strictly inside (0, 1)"));
        }
        let (eps, l) = self.epsilon_and_steps();
        let its = ItsConfig::new(eps, l).map_err(|e| match e {
            Error::Config { field, reason } => Error::config(
                if field == "steps_l" { "steps".to_string() } else { field },
                reason,
            ),
            other => other,
        })?;
        let its = its.with_final_phase_order(self.final_phase_order);

        let edge_joint = EdgeJointDistribution::with_flip(self.p0, self.edge_flip)
            .map_err(|e| Error::config("edge_flip", e.to_string()))?;
        let gm = QueryChannel::symmetric(self.gm_flip)
            .map_err(|e| Error::config("gm_flip", e.to_string()))?;
        let prior =
            make_prior(&self.prior, self.m).map_err(|e| Error::config("prior", e.to_string()))?;
        let measures = InfoMeasures::from_model(&edge_joint, &gm)
            .map_err(|e| Error::config("p0", e.to_string()))?;
        if self.strategy == Strategy::Its && measures.mutual_info <= 0.0 && !self.allow_degenerate {
            return Err(Error::config(
                "gm_flip",
                "the model has zero mutual information; set allow_degenerate to run anyway",
            ));
        }
        let h = entropy(&prior);
        let bounds = BoundReport::compute(BoundParams {
            epsilon: eps,
            l,
            entropy: h,
            mutual_info: measures.mutual_info,
            i_max: measures.i_max,
            m: self.m,
            n: self.n,
        });
        Ok(ResolvedModel {
            edge_joint,
            gm,
            prior,
            measures,
            entropy: h,
            its,
            bounds,
        })
    }
}
