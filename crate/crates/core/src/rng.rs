//! Seeding discipline.
//!
//! Every random stream is a ChaCha8 generator (portable and platform-independent)
//! seeded from a 64-bit value. Sub-streams are derived with
//!
//! ```text
//! derive_seed(base, index) = splitmix64(base ^ splitmix64(index))
//! ```
//!
//! so realization `i` of an experiment with base seed `s` is generated from
//! `derive_seed(s, i)`, and further purposes (flow endpoints, scheduling trials)
//! derive again from that value with their own index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// The SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
