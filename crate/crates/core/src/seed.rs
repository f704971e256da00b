//! Seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] seeded from a 64-bit
//! value. Independent sub-streams (per trial, per node, sampler vs. learner)
//! are obtained with [`derive_seed`], which mixes the parent seed with a
//! stream label through SplitMix64. The mapping is fixed, so a master seed
//! reproduces the same files on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all sampling and simulated measurements.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `stream` of `parent`.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Well-known stream labels used by the experiment runner.
pub mod streams {
    pub const MODEL: u64 = 1;
    pub const SAMPLER: u64 = 2;
    pub const LEARNER: u64 = 3;
    pub const TRIAL_BASE: u64 = 1 << 32;
}
