//! Reproducible random streams.
//!
//! Every replicate draws from its own generator derived from
//! `(master seed, domain, replicate index)`, so aggregates do not depend on
//! how replicates are scheduled over workers.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator used throughout the crate.
pub type SimRng = Xoshiro256PlusPlus;

/// Stream domain for the simulated model.
pub const DOMAIN_MODEL: u64 = 0x6d6f_6465_6c00_0001;
/// Stream domain for reference-law samples; independent of the model stream.
pub const DOMAIN_REFERENCE: u64 = 0x7265_6665_7200_0002;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the stream for `(master, domain, index)`.
pub fn stream_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(domain)) ^ index)
}

/// Generator for `(master, domain, index)`.
pub fn stream_rng(master: u64, domain: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(stream_seed(master, domain, index))
}

/// Generator seeded directly, for single-shot commands.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
