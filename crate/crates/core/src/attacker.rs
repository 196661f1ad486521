//! The information threshold strategy and a UID-scan baseline.
//!
//! The attacker keeps one accumulated information density per candidate.
//! A candidate's *information value* is that accumulation minus its prior
//! surprisal `log2(1 / P_J(j))`. GM queries walk the groups in order until
//! some live candidate's value reaches `log2(1 / epsilon)`; the best
//! candidate is then checked with a UID query. A refuted candidate is
//! dropped for good, the accumulations are reset, and the next step resumes
//! at the first unqueried group. After `steps_l - 1` threshold steps the
//! remaining users are verified one by one.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::bounds::asymptotic_params;
use crate::error::{Error, Result};
use crate::graph::{BigraphPair, GroupId, UserId};
use crate::oracle::{expected_response_column, VictimInstance};
use crate::stochastics::{InfoMeasures, VictimPrior};

/// Order in which GM queries visit groups.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupOrder {
    #[default]
    Sequential,
}

/// Order of the exhaustive UID phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalPhaseOrder {
    #[default]
    ByInfoValueDesc,
    Random,
    ByPriorDesc,
}

impl std::str::FromStr for FinalPhaseOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "by_info_value_desc" | "info" => Ok(Self::ByInfoValueDesc),
            "random" => Ok(Self::Random),
            "by_prior_desc" | "prior" => Ok(Self::ByPriorDesc),
            _ => Err(Error::config("final_phase_order", format!("unknown order `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItsConfig {
    pub epsilon: f64,
    pub steps_l: usize,
    #[serde(default)]
    pub group_order: GroupOrder,
    #[serde(default)]
    pub final_phase_order: FinalPhaseOrder,
    /// Seed for the `Random` final phase.
    #[serde(default)]
    pub order_seed: u64,
    /// Keep every information-value vector in the transcript.
    #[serde(default)]
    pub record_trajectory: bool,
}

impl ItsConfig {
    pub fn new(epsilon: f64, steps_l: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::config("epsilon", format!("{epsilon} is not in (0, 1)")));
        }
        if steps_l == 0 {
            return Err(Error::config("steps_l", "must be at least 1"));
        }
        Ok(Self {
            epsilon,
            steps_l,
            group_order: GroupOrder::Sequential,
            final_phase_order: FinalPhaseOrder::default(),
            order_seed: 0,
            record_trajectory: false,
        })
    }

    /// Asymptotic parameter choice for `m` users, clamped for small `m`.
    pub fn auto(m: usize) -> Self {
        let (epsilon, steps_l) = default_params(m);
        Self::new(epsilon, steps_l).expect("default parameters are valid")
    }

    pub fn with_final_phase_order(mut self, order: FinalPhaseOrder) -> Self {
        self.final_phase_order = order;
        self
    }

    /// `log2(1 / epsilon)` in bits.
    pub fn threshold(&self) -> f64 {
        (1.0 / self.epsilon).log2()
    }
}

/// Attacker defaults: the asymptotic `(epsilon, l)` with `epsilon` clamped
/// to `(0, 0.5]` and `l >= 2`; `m <= 16` uses `(0.25, 3)`.
pub fn default_params(m: usize) -> (f64, usize) {
    if m <= 16 {
        return (0.25, 3);
    }
    let (eps, l) = asymptotic_params(m);
    (eps.min(0.5), l.max(2))
}

/// Outcome of a threshold test.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdDecision {
    pub stop: bool,
    /// Live candidates whose information value is at or above threshold.
    pub crossing: Vec<UserId>,
}

/// Per-run attacker state.
#[derive(Debug, Clone, PartialEq)]
pub struct ItsState {
    /// Accumulated density per candidate; `-inf` once an observation was
    /// impossible for that candidate in the current step.
    pub info: Vec<f64>,
    /// `log2(1 / P_J(j))`.
    pub prior_surprisal: Vec<f64>,
    /// Next group to query, in `[1, n + 1]`.
    pub group_cursor: GroupId,
    pub step: usize,
    /// Candidates refuted by a UID query.
    pub eliminated: BitVector,
}

pub fn init_state(prior: &VictimPrior, _config: &ItsConfig) -> ItsState {
    let m = prior.len();
    ItsState {
        info: vec![0.0; m],
        prior_surprisal: prior.probs().iter().map(|p| (1.0 / p).log2()).collect(),
        group_cursor: GroupId(1),
        step: 1,
        eliminated: BitVector::zeros(m),
    }
}

impl ItsState {
    pub fn m(&self) -> usize {
        self.info.len()
    }

    /// I(j): accumulated density minus prior surprisal.
    #[inline]
    pub fn information_value(&self, j: usize) -> f64 {
        self.info[j] - self.prior_surprisal[j]
    }

    pub fn information_values(&self) -> Vec<f64> {
        (0..self.m()).map(|j| self.information_value(j)).collect()
    }

    #[inline]
    fn is_live(&self, j: usize) -> bool {
        !self.eliminated.get(j) && self.info[j] != f64::NEG_INFINITY
    }

    /// Candidates not refuted by UID, regardless of the current step's
    /// evidence.
    pub fn remaining(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.m()).filter(|&j| !self.eliminated.get(j))
    }

    /// Add `density(column[j], y)` to every candidate not refuted by UID.
    pub fn gm_update(&mut self, column: &BitVector, y: bool, measures: &InfoMeasures) {
        assert_eq!(column.len(), self.m(), "column length must equal m");
        let d0 = measures.density(false, y);
        let d1 = measures.density(true, y);
        for (j, info) in self.info.iter_mut().enumerate() {
            if self.eliminated.get(j) {
                continue;
            }
            *info += if column.get(j) { d1 } else { d0 };
        }
    }

    pub fn threshold_check(&self, epsilon: f64) -> ThresholdDecision {
        let threshold = (1.0 / epsilon).log2();
        let crossing: Vec<UserId> = (0..self.m())
            .filter(|&j| self.is_live(j) && self.information_value(j) >= threshold)
            .map(UserId::from_index)
            .collect();
        ThresholdDecision {
            stop: !crossing.is_empty(),
            crossing,
        }
    }

    /// Live candidate with the largest information value, lowest index on
    /// ties. `None` when no candidate is live.
    pub fn select_candidate(&self) -> Option<UserId> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.m() {
            if !self.is_live(j) {
                continue;
            }
            let v = self.information_value(j);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        best.map(|(j, _)| UserId::from_index(j))
    }

    pub fn eliminate(&mut self, user: UserId) {
        self.eliminated.set(user.index(), true);
    }

    /// Start the next step: accumulations back to zero, step-local
    /// eliminations lifted.
    pub fn reset(&mut self) {
        self.info.iter_mut().for_each(|v| *v = 0.0);
        self.step += 1;
    }

    fn live_count(&self) -> usize {
        (0..self.m()).filter(|&j| self.is_live(j)).count()
    }

    fn single_remaining(&self) -> Option<usize> {
        let mut it = self.remaining();
        match (it.next(), it.next()) {
            (Some(j), None) => Some(j),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryKind {
    #[serde(rename = "GM")]
    Gm,
    #[serde(rename = "UID")]
    Uid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub kind: QueryKind,
    /// Group index for GM, user index for UID (both 1-based).
    pub target: usize,
    pub response: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackTranscript {
    pub victim: Option<UserId>,
    pub queries: Vec<QueryRecord>,
    pub q_count: usize,
    pub success: bool,
    pub identified: Option<UserId>,
    pub steps_used: usize,
    /// GM queries issued in each threshold step that ended in a UID check.
    pub tau_star_per_step: Vec<usize>,
    /// Result of each threshold step's verification query.
    pub step_outcomes: Vec<bool>,
    /// Whether the exhaustive phase was entered.
    pub exhaustive_phase: bool,
    /// Information values after the step start and after every GM query,
    /// one list per threshold step; empty unless requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<Vec<Vec<f64>>>,
}

impl AttackTranscript {
    fn new(victim: UserId) -> Self {
        Self {
            victim: Some(victim),
            queries: Vec::new(),
            q_count: 0,
            success: false,
            identified: None,
            steps_used: 0,
            tau_star_per_step: Vec::new(),
            step_outcomes: Vec::new(),
            exhaustive_phase: false,
            trajectory: Vec::new(),
        }
    }

    fn push(&mut self, kind: QueryKind, target: usize, response: bool) {
        self.queries.push(QueryRecord {
            kind,
            target,
            response,
        });
        self.q_count = self.queries.len();
    }

    fn next_ordinal(&self) -> u64 {
        self.queries.len() as u64 + 1
    }

    pub fn gm_count(&self) -> usize {
        self.queries.iter().filter(|q| q.kind == QueryKind::Gm).count()
    }

    pub fn uid_count(&self) -> usize {
        self.queries.iter().filter(|q| q.kind == QueryKind::Uid).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Issue UID queries over `order` until the victim answers yes.
fn verify_in_order(
    inst: &VictimInstance<'_>,
    order: impl IntoIterator<Item = UserId>,
    transcript: &mut AttackTranscript,
) -> Result<bool> {
    for user in order {
        let hit = inst.uid_response(user)?;
        transcript.push(QueryKind::Uid, user.0, hit);
        if hit {
            transcript.success = true;
            transcript.identified = Some(user);
            return Ok(true);
        }
    }
    Ok(false)
}

fn sort_desc_by_key(users: &mut [usize], key: impl Fn(usize) -> f64) {
    // stable sort keeps lowest index first among equal keys
    users.sort_by(|&a, &b| key(b).total_cmp(&key(a)));
}

/// Run the information threshold strategy against one victim.
pub fn run_its(
    pair: &BigraphPair,
    inst: &VictimInstance<'_>,
    prior: &VictimPrior,
    measures: &InfoMeasures,
    config: &ItsConfig,
) -> Result<AttackTranscript> {
    if prior.len() != pair.m() {
        return Err(Error::Dimension(format!(
            "prior has {} entries but the graph has {} users",
            prior.len(),
            pair.m()
        )));
    }
    let n = pair.n();
    let mut state = init_state(prior, config);
    let mut transcript = AttackTranscript::new(inst.victim());
    let record = config.record_trajectory;

    'steps: while state.step < config.steps_l {
        let mut trajectory = Vec::new();
        if record {
            trajectory.push(state.information_values());
        }
        let mut tau = 0;
        // A lone unrefuted candidate needs no GM evidence.
        let candidate = if let Some(j) = state.single_remaining() {
            UserId::from_index(j)
        } else {
            loop {
                if state.threshold_check(config.epsilon).stop {
                    break state.select_candidate().expect("a crossing candidate is live");
                }
                if state.live_count() == 0 || state.group_cursor.0 > n {
                    if record {
                        transcript.trajectory.push(trajectory);
                    }
                    break 'steps;
                }
                let group = state.group_cursor;
                let y = inst.noisy_gm_response(group, transcript.next_ordinal())?;
                transcript.push(QueryKind::Gm, group.0, y);
                let column = expected_response_column(pair, group)?;
                state.gm_update(&column, y, measures);
                state.group_cursor = GroupId(group.0 + 1);
                tau += 1;
                if record {
                    trajectory.push(state.information_values());
                }
            }
        };
        if record {
            transcript.trajectory.push(trajectory);
        }
        transcript.tau_star_per_step.push(tau);
        transcript.steps_used = state.step;
        let hit = verify_in_order(inst, [candidate], &mut transcript)?;
        transcript.step_outcomes.push(hit);
        if hit {
            return Ok(transcript);
        }
        state.eliminate(candidate);
        if state.step + 1 >= config.steps_l {
            // the final phase ranks by this step's evidence, so no reset
            state.step += 1;
            break;
        }
        state.reset();
    }

    transcript.exhaustive_phase = true;
    transcript.steps_used = transcript.step_outcomes.len() + 1;
    let mut order: Vec<usize> = state.remaining().collect();
    match config.final_phase_order {
        FinalPhaseOrder::ByInfoValueDesc => sort_desc_by_key(&mut order, |j| state.information_value(j)),
        FinalPhaseOrder::ByPriorDesc => sort_desc_by_key(&mut order, |j| prior.probs()[j]),
        FinalPhaseOrder::Random => {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(config.order_seed);
            order.shuffle(&mut rng);
        }
    }
    if !verify_in_order(inst, order.into_iter().map(UserId::from_index), &mut transcript)? {
        unreachable!("the victim is never refuted, so the exhaustive phase finds it");
    }
    Ok(transcript)
}

/// Candidate order for the UID-scan baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanOrder {
    Sequential,
    Random,
    Explicit(Vec<UserId>),
}

/// Verify users one at a time in `order` until the victim is found.
pub fn run_uid_scan(inst: &VictimInstance<'_>, order: &ScanOrder, seed: u64) -> Result<AttackTranscript> {
    let m = inst.pair().m();
    let users: Vec<UserId> = match order {
        ScanOrder::Sequential => (1..=m).map(UserId).collect(),
        ScanOrder::Random => {
            let mut v: Vec<UserId> = (1..=m).map(UserId).collect();
            v.shuffle(&mut Xoshiro256PlusPlus::seed_from_u64(seed));
            v
        }
        ScanOrder::Explicit(v) => {
            let mut seen = BitVector::zeros(m);
            for u in v {
                inst.pair().check_user(*u)?;
                if seen.get(u.index()) {
                    return Err(Error::config("order", format!("{u} listed twice")));
                }
                seen.set(u.index(), true);
            }
            if v.len() != m {
                return Err(Error::config("order", format!("{} of {m} users listed", v.len())));
            }
            v.clone()
        }
    };
    let mut transcript = AttackTranscript::new(inst.victim());
    transcript.exhaustive_phase = true;
    transcript.steps_used = 1;
    verify_in_order(inst, users, &mut transcript)?;
    debug_assert!(transcript.success);
    Ok(transcript)
}
