//! The victim side of the interaction: answers GM and UID queries.

use crate::bits::BitVector;
use crate::error::Result;
use crate::graph::{BigraphPair, GroupId, UserId, Which};
use crate::seeding::{derive, unit_f64};
use crate::stochastics::QueryChannel;

/// One trial's hidden victim together with the noise that corrupts its
/// answers to group-membership queries.
#[derive(Debug, Clone)]
pub struct VictimInstance<'a> {
    pair: &'a BigraphPair,
    victim: UserId,
    gm_channel: QueryChannel,
    noise_seed: u64,
}

impl<'a> VictimInstance<'a> {
    pub fn new(
        pair: &'a BigraphPair,
        victim: UserId,
        gm_channel: QueryChannel,
        noise_seed: u64,
    ) -> Result<Self> {
        pair.check_user(victim)?;
        Ok(Self {
            pair,
            victim,
            gm_channel,
            noise_seed,
        })
    }

    pub fn pair(&self) -> &'a BigraphPair {
        self.pair
    }

    /// Ground truth, for bookkeeping outside the attack loop.
    pub fn victim(&self) -> UserId {
        self.victim
    }

    pub fn gm_channel(&self) -> &QueryChannel {
        &self.gm_channel
    }

    /// Z: the victim's membership bit for `group` in the true graph.
    pub fn true_gm_response(&self, group: GroupId) -> Result<bool> {
        self.pair.check_group(group)?;
        Ok(self.pair.edge(Which::True, self.victim, group))
    }

    /// Y: the answer as received. The noise draw is addressed by
    /// `query_ordinal`, so repeated queries of one group see fresh noise
    /// and a replayed ordinal sees the same noise.
    pub fn noisy_gm_response(&self, group: GroupId, query_ordinal: u64) -> Result<bool> {
        let z = self.true_gm_response(group)?;
        let u = unit_f64(derive(self.noise_seed, query_ordinal));
        Ok(u < self.gm_channel.prob(true, z))
    }

    /// UID answers are exact.
    pub fn uid_response(&self, candidate: UserId) -> Result<bool> {
        self.pair.check_user(candidate)?;
        Ok(candidate == self.victim)
    }
}

/// U for every candidate at once: column `group` of the scanned graph.
pub fn expected_response_column(pair: &BigraphPair, group: GroupId) -> Result<BitVector> {
    pair.column(Which::Scanned, group)
}
