//! Correlated pairs of random bipartite membership graphs.
//!
//! Users and groups are 1-indexed at this module's boundary. Signatures are
//! packed user-major: each user owns one 64-bit word per block of 64 groups,
//! and a group column is gathered from those words. The edge pair at
//! `(user, group)` is decided by a hash of `(seed, user, group)`, so any row
//! or block can be derived without touching the rest of the graph.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::seeding::derive;
use crate::stochastics::EdgeJointDistribution;

/// 1-based user index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub usize);

/// 1-based group index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub usize);

impl UserId {
    #[inline]
    pub fn from_index(i: usize) -> Self {
        UserId(i + 1)
    }

    /// Zero-based position.
    #[inline]
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl GroupId {
    #[inline]
    pub fn from_index(i: usize) -> Self {
        GroupId(i + 1)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl std::fmt::Display for UserId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "u{}", self.0)
    }
}

impl std::fmt::Display for GroupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Which of the two graphs to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// The membership graph the victim's responses come from.
    True,
    /// The attacker's scanned copy.
    Scanned,
}

/// Per-position sampler for a 2x2 joint law, driven by one `u64` per draw.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairSampler {
    // cumulative thresholds over cells (0,0), (0,1), (1,0)
    cuts: [u64; 3],
    fallback: (bool, bool),
}

const CELLS: [(bool, bool); 4] = [(false, false), (false, true), (true, false), (true, true)];

impl PairSampler {
    pub(crate) fn new(edge_joint: &EdgeJointDistribution) -> Self {
        let scale = 18_446_744_073_709_551_616.0; // 2^64
        let mut acc = 0.0;
        let mut cuts = [0u64; 3];
        for (k, &(a, b)) in CELLS[..3].iter().enumerate() {
            acc += edge_joint.prob(a, b);
            cuts[k] = (acc * scale) as u64;
        }
        let fallback = *CELLS
            .iter()
            .rev()
            .find(|&&(a, b)| edge_joint.prob(a, b) > 0.0)
            .expect("normalized table has a positive cell");
        Self { cuts, fallback }
    }

    #[inline]
    pub(crate) fn draw(&self, w: u64) -> (bool, bool) {
        if w < self.cuts[0] {
            CELLS[0]
        } else if w < self.cuts[1] {
            CELLS[1]
        } else if w < self.cuts[2] {
            CELLS[2]
        } else {
            self.fallback
        }
    }
}

/// Key of user `user`'s row; every position of the row hashes off it.
#[inline]
pub fn row_key(seed: u64, user: UserId) -> u64 {
    derive(seed, user.index() as u64)
}

/// The random word that decides the edge pair at `(user, group)`.
#[inline]
pub fn position_word(row_key: u64, group: GroupId) -> u64 {
    derive(row_key, group.index() as u64)
}

const BLOCK: usize = 64;

/// One 64-group slab of both graphs: `m` words of the true graph followed
/// by `m` words of the scanned graph, bit `k` of a word = group `64b + k`.
type Block = Box<[u64]>;

#[derive(Debug, Clone)]
struct Source {
    seed: u64,
    sampler: PairSampler,
}

/// True graph and scanned graph over the same `m` users and `n` groups.
///
/// Generated pairs fill their 64-group blocks on first access; a block's
/// content depends only on the seed and its positions, so the pair reads
/// the same whichever blocks were touched first.
#[derive(Clone)]
pub struct BigraphPair {
    n: usize,
    m: usize,
    blocks: Vec<OnceLock<Block>>,
    source: Option<Source>,
}

impl std::fmt::Debug for BigraphPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BigraphPair")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl PartialEq for BigraphPair {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && (0..self.blocks.len()).all(|b| self.block(b) == other.block(b))
    }
}

impl Eq for BigraphPair {}

/// Draw each of the `m * n` positions independently from `edge_joint`.
pub fn generate_cprb(
    n: usize,
    m: usize,
    edge_joint: &EdgeJointDistribution,
    seed: u64,
) -> Result<BigraphPair> {
    if n == 0 || m == 0 {
        return Err(Error::Dimension(format!(
            "need at least one group and one user, got n = {n}, m = {m}"
        )));
    }
    Ok(BigraphPair {
        n,
        m,
        blocks: (0..n.div_ceil(BLOCK)).map(|_| OnceLock::new()).collect(),
        source: Some(Source {
            seed,
            sampler: PairSampler::new(edge_joint),
        }),
    })
}

impl BigraphPair {
    fn block(&self, b: usize) -> &[u64] {
        self.blocks[b].get_or_init(|| {
            let src = self
                .source
                .as_ref()
                .expect("explicit pairs are built fully materialized");
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(self.n);
            let mut words = vec![0u64; 2 * self.m];
            for i in 0..self.m {
                let key = row_key(src.seed, UserId::from_index(i));
                let (mut w0, mut w1) = (0u64, 0u64);
                for k in lo..hi {
                    let (a, c) = src.sampler.draw(position_word(key, GroupId::from_index(k)));
                    w0 |= (a as u64) << (k - lo);
                    w1 |= (c as u64) << (k - lo);
                }
                words[i] = w0;
                words[self.m + i] = w1;
            }
            words.into_boxed_slice()
        })
    }

    #[inline]
    fn word(&self, which: Which, user: usize, b: usize) -> u64 {
        let off = match which {
            Which::True => 0,
            Which::Scanned => self.m,
        };
        self.block(b)[off + user]
    }

    /// Build from explicit user rows. Both lists must have `m` rows of
    /// equal length `n`.
    pub fn from_rows(sig0: &[BitVector], sig1: &[BitVector]) -> Result<Self> {
        let m = sig0.len();
        if m == 0 || sig1.len() != m {
            return Err(Error::Dimension(format!(
                "row counts {} and {} must match and be positive",
                sig0.len(),
                sig1.len()
            )));
        }
        let n = sig0[0].len();
        if n == 0 || sig0.iter().chain(sig1).any(|r| r.len() != n) {
            return Err(Error::Dimension("all rows must share a positive length".into()));
        }
        let blocks = (0..n.div_ceil(BLOCK))
            .map(|b| {
                let mut words = vec![0u64; 2 * m];
                for k in b * BLOCK..((b + 1) * BLOCK).min(n) {
                    for i in 0..m {
                        words[i] |= (sig0[i].get(k) as u64) << (k % BLOCK);
                        words[m + i] |= (sig1[i].get(k) as u64) << (k % BLOCK);
                    }
                }
                OnceLock::from(words.into_boxed_slice())
            })
            .collect();
        Ok(Self {
            n,
            m,
            blocks,
            source: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn check_user(&self, user: UserId) -> Result<()> {
        if user.0 == 0 || user.0 > self.m {
            return Err(Error::IndexOutOfRange {
                kind: "user",
                index: user.0,
                max: self.m,
            });
        }
        Ok(())
    }

    pub fn check_group(&self, group: GroupId) -> Result<()> {
        if group.0 == 0 || group.0 > self.n {
            return Err(Error::IndexOutOfRange {
                kind: "group",
                index: group.0,
                max: self.n,
            });
        }
        Ok(())
    }

    /// F_{user,group} in the selected graph. Indices must be in range.
    #[inline]
    pub fn edge(&self, which: Which, user: UserId, group: GroupId) -> bool {
        let k = group.index();
        (self.word(which, user.index(), k / BLOCK) >> (k % BLOCK)) & 1 == 1
    }

    pub fn group_signature(&self, which: Which, user: UserId) -> Result<BitVector> {
        self.check_user(user)?;
        let i = user.index();
        let words = (0..self.blocks.len()).map(|b| self.word(which, i, b)).collect();
        Ok(BitVector::from_words(self.n, words))
    }

    /// Groups `first..=last` of the user's signature.
    pub fn partial_signature(
        &self,
        which: Which,
        user: UserId,
        first: GroupId,
        last: GroupId,
    ) -> Result<BitVector> {
        self.check_user(user)?;
        if first.0 == 0 || first > last || last.0 > self.n {
            return Err(Error::InvalidRange {
                lo: first.0,
                hi: last.0,
                len: self.n,
            });
        }
        Ok(BitVector::from_bools(
            (first.0..=last.0).map(|k| self.edge(which, user, GroupId(k))),
        ))
    }

    /// Indicator vector over users of membership in `group`.
    pub fn column(&self, which: Which, group: GroupId) -> Result<BitVector> {
        self.check_group(group)?;
        let k = group.index();
        let off = match which {
            Which::True => 0,
            Which::Scanned => self.m,
        };
        let words = &self.block(k / BLOCK)[off..off + self.m];
        let shift = k % BLOCK;
        let packed = words
            .chunks(64)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (r, w)| acc | (((w >> shift) & 1) << r))
            })
            .collect();
        Ok(BitVector::from_words(self.m, packed))
    }

    pub fn members(&self, which: Which, group: GroupId) -> Result<BTreeSet<UserId>> {
        let col = self.column(which, group)?;
        Ok(col
            .iter()
            .enumerate()
            .filter(|(_, b)| *b)
            .map(|(i, _)| UserId::from_index(i))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&BigraphJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: BigraphJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

/// On-disk form: hex rows, most significant bit = group 1.
#[derive(Debug, Serialize, Deserialize)]
struct BigraphJson {
    n: usize,
    m: usize,
    sig0: Vec<String>,
    sig1: Vec<String>,
}

impl From<&BigraphPair> for BigraphJson {
    fn from(g: &BigraphPair) -> Self {
        let rows = |which| {
            (1..=g.m)
                .map(|i| g.group_signature(which, UserId(i)).unwrap().to_hex())
                .collect()
        };
        Self {
            n: g.n,
            m: g.m,
            sig0: rows(Which::True),
            sig1: rows(Which::Scanned),
        }
    }
}

impl TryFrom<BigraphJson> for BigraphPair {
    type Error = Error;
    fn try_from(raw: BigraphJson) -> Result<Self> {
        if raw.sig0.len() != raw.m || raw.sig1.len() != raw.m {
            return Err(Error::Encoding(format!(
                "expected {} rows per graph, got {} and {}",
                raw.m,
                raw.sig0.len(),
                raw.sig1.len()
            )));
        }
        let decode = |rows: &[String]| -> Result<Vec<BitVector>> {
            rows.iter()
                .enumerate()
                .map(|(i, h)| {
                    BitVector::from_hex(h, raw.n).ok_or_else(|| {
                        Error::Encoding(format!("row {} is not a {}-bit hex string", i + 1, raw.n))
                    })
                })
                .collect()
        };
        BigraphPair::from_rows(&decode(&raw.sig0)?, &decode(&raw.sig1)?)
    }
}
