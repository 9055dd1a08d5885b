//! Reproducible randomness.
//!
//! Every random draw in this crate goes through [`SplitMix64`] (Steele, Lea and
//! Flood, 2014): a 64-bit counter-based generator whose state advances by the
//! constant `0x9E3779B97F4A7C15` and whose output is a fixed bijective mix of the
//! counter. Given the seed, outputs are identical on every platform.

pub use rand_xoshiro::SplitMix64;
use rand::SeedableRng;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}
