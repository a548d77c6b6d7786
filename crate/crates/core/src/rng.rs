//! Keyed random streams.
//!
//! Every random decision in a run draws from a stream derived from
//! `(seed, lane, index, step)`, so particles can be processed in any order
//! (or in parallel) and still replay bit-identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tag mixed into a stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Lane {
    Assign = 1,
    Rejuvenate = 2,
    Resample = 3,
    Drift = 4,
    Warm = 5,
    Decorrelate = 6,
    Refit = 7,
    Generate = 8,
    Split = 9,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn stream(seed: u64, lane: Lane, index: u64, step: u64) -> StreamRng {
    let mut h = splitmix(seed);
    h = splitmix(h ^ lane as u64);
    h = splitmix(h ^ index);
    h = splitmix(h ^ step);
    ChaCha8Rng::seed_from_u64(h)
}
