//! Seeded generators and the stream-splitting rule.
//!
//! Every generator in a simulation is created from a child seed derived from
//! the master seed and a tuple of integer coordinates, so any replication can
//! be re-run on its own and results do not depend on scheduling.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of `(master, coords...)`.
///
/// The value only depends on its inputs, never on platform, thread count or
/// library version.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    let mut h = mix64(master.wrapping_add(GOLDEN));
    for (i, &c) in coords.iter().enumerate() {
        h = mix64(h ^ mix64(c.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 2))));
    }
    h
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn child_rng(master: u64, coords: &[u64]) -> SimRng {
    seeded(derive_seed(master, coords))
}
