//! Probability laws of the de-anonymization model and the information
//! measures derived from them. All logarithms are base 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UserId;
use crate::seeding::unit_f64;

const SUM_TOL: f64 = 1e-12;

fn check_prob(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::Distribution(format!("{what} = {x} is not a probability")));
    }
    Ok(())
}

/// Joint law of the (true, scanned) edge indicator pair at one position.
/// `table[a][b] = P(E0 = a, E1 = b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeJointDistribution {
    table: [[f64; 2]; 2],
}

impl EdgeJointDistribution {
    pub fn new(table: [[f64; 2]; 2]) -> Result<Self> {
        let mut sum = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                check_prob(table[a][b], "edge joint entry")?;
                sum += table[a][b];
            }
        }
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Distribution(format!(
                "edge joint entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { table })
    }

    /// True edge present with probability `p0`; the scanned edge disagrees
    /// with the true one with probability `flip`.
    pub fn with_flip(p0: f64, flip: f64) -> Result<Self> {
        check_prob(p0, "p0")?;
        check_prob(flip, "edge flip")?;
        Self::new([
            [(1.0 - p0) * (1.0 - flip), (1.0 - p0) * flip],
            [p0 * flip, p0 * (1.0 - flip)],
        ])
    }

    /// Product law: true and scanned edges independent.
    pub fn independent(p0: f64, p1: f64) -> Result<Self> {
        check_prob(p0, "p0")?;
        check_prob(p1, "p1")?;
        Self::new([
            [(1.0 - p0) * (1.0 - p1), (1.0 - p0) * p1],
            [p0 * (1.0 - p1), p0 * p1],
        ])
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.table
    }

    #[inline]
    pub fn prob(&self, e0: bool, e1: bool) -> f64 {
        self.table[e0 as usize][e1 as usize]
    }

    /// P(E0 = 1).
    pub fn p0(&self) -> f64 {
        self.table[1][0] + self.table[1][1]
    }

    /// P(E1 = 1).
    pub fn p1(&self) -> f64 {
        self.table[0][1] + self.table[1][1]
    }

    /// P(E1 = e1 | E0 = e0), undefined when P(E0 = e0) = 0.
    pub fn scanned_given_true(&self, e1: bool, e0: bool) -> Option<f64> {
        let row = self.table[e0 as usize];
        let mass = row[0] + row[1];
        (mass > 0.0).then(|| row[e1 as usize] / mass)
    }
}

/// Binary-input binary-output response channel, `table[z][y] = P(y | z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryChannel {
    table: [[f64; 2]; 2],
}

impl QueryChannel {
    /// UID queries are answered without noise.
    pub const UID: QueryChannel = QueryChannel {
        table: [[1.0, 0.0], [0.0, 1.0]],
    };

    pub fn new(table: [[f64; 2]; 2]) -> Result<Self> {
        for (z, row) in table.iter().enumerate() {
            check_prob(row[0], "channel entry")?;
            check_prob(row[1], "channel entry")?;
            if (row[0] + row[1] - 1.0).abs() > SUM_TOL {
                return Err(Error::Distribution(format!(
                    "channel row {z} sums to {}, expected 1",
                    row[0] + row[1]
                )));
            }
        }
        Ok(Self { table })
    }

    pub fn identity() -> Self {
        Self::UID
    }

    /// Binary symmetric channel with crossover probability `flip`.
    pub fn symmetric(flip: f64) -> Result<Self> {
        check_prob(flip, "gm flip")?;
        Self::new([[1.0 - flip, flip], [flip, 1.0 - flip]])
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.table
    }

    /// P(Y = y | Z = z).
    #[inline]
    pub fn prob(&self, y: bool, z: bool) -> f64 {
        self.table[z as usize][y as usize]
    }

    /// Series composition: `self` followed by `next`.
    pub fn then(&self, next: &QueryChannel) -> QueryChannel {
        let mut t = [[0.0; 2]; 2];
        for z in 0..2 {
            for y in 0..2 {
                t[z][y] = (0..2).map(|w| self.table[z][w] * next.table[w][y]).sum();
            }
        }
        QueryChannel { table: t }
    }
}

/// Distribution of the victim's index over `[1, m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct VictimPrior {
    probs: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl TryFrom<Vec<f64>> for VictimPrior {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        VictimPrior::new(v)
    }
}

impl From<VictimPrior> for Vec<f64> {
    fn from(p: VictimPrior) -> Vec<f64> {
        p.probs
    }
}

impl VictimPrior {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Distribution("prior over zero users".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p > 0.0 && **p <= 1.0))
        {
            return Err(Error::Distribution(format!(
                "prior entry {} = {p} must be in (0, 1]",
                i + 1
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Distribution(format!("prior sums to {sum}, expected 1")));
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { probs, cdf })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("m must be positive".into()));
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    /// Probabilities proportional to `rank^-s`.
    pub fn zipf(m: usize, s: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("m must be positive".into()));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Distribution(format!("zipf exponent {s} must be >= 0")));
        }
        let weights: Vec<f64> = (1..=m).map(|k| (k as f64).powf(-s)).collect();
        let total: f64 = weights.iter().sum();
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// P_J(user).
    pub fn prob(&self, user: UserId) -> f64 {
        self.probs[user.index()]
    }

    /// Inverse-CDF draw from a uniform variate in [0, 1).
    pub fn quantile(&self, u: f64) -> UserId {
        let total = *self.cdf.last().unwrap();
        let target = u * total;
        let i = self.cdf.partition_point(|&c| c <= target);
        UserId::from_index(i.min(self.probs.len() - 1))
    }
}

/// Prior families selectable from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PriorKind {
    Uniform,
    Zipf(f64),
    Explicit(Vec<f64>),
}

impl std::str::FromStr for PriorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("uniform") {
            return Ok(PriorKind::Uniform);
        }
        if let Some(exp) = s.strip_prefix("zipf:") {
            let v: f64 = exp
                .parse()
                .map_err(|_| Error::config("prior", format!("bad zipf exponent `{exp}`")))?;
            return Ok(PriorKind::Zipf(v));
        }
        if let Some(list) = s.strip_prefix("explicit:") {
            let v = list
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::config("prior", format!("bad explicit vector `{list}`")))?;
            return Ok(PriorKind::Explicit(v));
        }
        Err(Error::config(
            "prior",
            format!("expected uniform, zipf:S or explicit:p1,p2,..., got `{s}`"),
        ))
    }
}

impl std::fmt::Display for PriorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PriorKind::Uniform => write!(f, "uniform"),
            PriorKind::Zipf(s) => write!(f, "zipf:{s}"),
            PriorKind::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|p| p.to_string()).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
        }
    }
}

impl From<PriorKind> for String {
    fn from(k: PriorKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for PriorKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

pub fn make_prior(kind: &PriorKind, m: usize) -> Result<VictimPrior> {
    match kind {
        PriorKind::Uniform => VictimPrior::uniform(m),
        PriorKind::Zipf(s) => VictimPrior::zipf(m, *s),
        PriorKind::Explicit(v) => {
            if v.len() != m {
                return Err(Error::Dimension(format!(
                    "explicit prior has {} entries, expected {m}",
                    v.len()
                )));
            }
            VictimPrior::new(v.clone())
        }
    }
}

/// Draw J ~ P_J deterministically from `seed`.
pub fn sample_victim(prior: &VictimPrior, seed: u64) -> UserId {
    prior.quantile(unit_f64(crate::seeding::mix64(seed)))
}

/// `table[u][y][z] = P_Z(z) P_{E1|E0}(u|z) P^GM(y|z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointUYZ {
    table: [[[f64; 2]; 2]; 2],
}

impl JointUYZ {
    pub fn table(&self) -> [[[f64; 2]; 2]; 2] {
        self.table
    }

    #[inline]
    pub fn prob(&self, u: bool, y: bool, z: bool) -> f64 {
        self.table[u as usize][y as usize][z as usize]
    }

    pub fn p_uy(&self, u: bool, y: bool) -> f64 {
        self.prob(u, y, false) + self.prob(u, y, true)
    }

    pub fn p_u(&self, u: bool) -> f64 {
        self.p_uy(u, false) + self.p_uy(u, true)
    }

    pub fn p_y(&self, y: bool) -> f64 {
        self.p_uy(false, y) + self.p_uy(true, y)
    }

    /// P(Y = y | U = u); zero when P(U = u) = 0.
    pub fn p_y_given_u(&self, y: bool, u: bool) -> f64 {
        let pu = self.p_u(u);
        if pu > 0.0 {
            self.p_uy(u, y) / pu
        } else {
            0.0
        }
    }
}

pub fn build_joint_uyz(edge_joint: &EdgeJointDistribution, gm: &QueryChannel) -> Result<JointUYZ> {
    let p0 = edge_joint.p0();
    if p0 <= 0.0 || p0 >= 1.0 {
        return Err(Error::DegenerateModel(format!(
            "p0 = {p0}: the true-edge marginal must lie strictly inside (0, 1)"
        )));
    }
    let mut table = [[[0.0; 2]; 2]; 2];
    for z in [false, true] {
        let pz = if z { p0 } else { 1.0 - p0 };
        for u in [false, true] {
            let pu = edge_joint
                .scanned_given_true(u, z)
                .expect("conditional defined for interior p0");
            for y in [false, true] {
                table[u as usize][y as usize][z as usize] = pz * pu * gm.prob(y, z);
            }
        }
    }
    Ok(JointUYZ { table })
}

/// i(u; y) = log2 P(y|u) / P(y). Returns `-inf` when P(y|u) = 0.
pub fn info_density(joint: &JointUYZ, u: bool, y: bool) -> f64 {
    let py = joint.p_y(y);
    let pyu = joint.p_y_given_u(y, u);
    if pyu == 0.0 {
        return f64::NEG_INFINITY;
    }
    debug_assert!(py > 0.0);
    (pyu / py).log2()
}

pub fn mutual_information(joint: &JointUYZ) -> f64 {
    let mut mi = 0.0;
    for u in [false, true] {
        for y in [false, true] {
            let puy = joint.p_uy(u, y);
            if puy > 0.0 {
                mi += puy * (puy / (joint.p_u(u) * joint.p_y(y))).log2();
            }
        }
    }
    mi.max(0.0)
}

/// Shannon entropy of the prior in bits.
pub fn entropy(prior: &VictimPrior) -> f64 {
    -prior
        .probs()
        .iter()
        .map(|&p| if p > 0.0 { p * p.log2() } else { 0.0 })
        .sum::<f64>()
}

/// Density table and the scalar measures the attacker and the bounds need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoMeasures {
    /// `density[u][y]` in bits, `-inf` for impossible observations.
    pub density: [[f64; 2]; 2],
    pub mutual_info: f64,
    pub i_max: f64,
}

impl InfoMeasures {
    pub fn from_joint(joint: &JointUYZ) -> Self {
        let mut density = [[0.0; 2]; 2];
        for u in [false, true] {
            for y in [false, true] {
                density[u as usize][y as usize] = if joint.p_y(y) > 0.0 {
                    info_density(joint, u, y)
                } else {
                    // y never observed; the entry is never consulted
                    f64::NEG_INFINITY
                };
            }
        }
        let mut measures = Self {
            density,
            mutual_info: mutual_information(joint),
            i_max: 0.0,
        };
        measures.i_max = i_max(&measures);
        measures
    }

    /// Convenience: build the joint from the model parameters and derive.
    pub fn from_model(edge_joint: &EdgeJointDistribution, gm: &QueryChannel) -> Result<Self> {
        Ok(Self::from_joint(&build_joint_uyz(edge_joint, gm)?))
    }

    #[inline]
    pub fn density(&self, u: bool, y: bool) -> f64 {
        self.density[u as usize][y as usize]
    }
}

/// Largest finite entry of the density table.
pub fn i_max(measures: &InfoMeasures) -> f64 {
    measures
        .density
        .iter()
        .flatten()
        .copied()
        .filter(|d| d.is_finite())
        .fold(f64::NEG_INFINITY, f64::max)
}
