//! Seeded randomness.
//!
//! Every random draw in the crate comes from xoshiro256++ seeded through
//! SplitMix64 (`Xoshiro256PlusPlus::seed_from_u64`). Uniform `f64` values
//! use the top 53 bits of each output word. Both algorithms have published
//! reference implementations, so sample streams can be reproduced outside
//! Rust.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
