//! Counter-based seed derivation.
//!
//! Every random quantity in a campaign is addressed by a tuple of integers
//! (master seed, trial, purpose, ...) and hashed down to a 64-bit value, so
//! no generator state is ever shared between trials.

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash an ordered pair of words into one.
#[inline]
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag).rotate_left(17))
}

/// Uniform draw on [0, 1) with 53 bits of resolution.
#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Purpose tags used when splitting a trial seed.
pub mod purpose {
    pub const GRAPH: u64 = 0x6772_6170_68;
    pub const VICTIM: u64 = 0x7669_6374_696d;
    pub const NOISE: u64 = 0x6e6f_6973_65;
    pub const ORDER: u64 = 0x6f72_6465_72;
}
