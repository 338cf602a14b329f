//! Deterministic derivation of sub-seeds from one master seed.
//!
//! `derive(master, stream, index)` mixes its arguments with SplitMix64, so
//! every (stream, index) pair gets an independent-looking 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_TRIAL: u64 = 1;
pub const STREAM_PERTURB: u64 = 2;
pub const STREAM_FOLDS: u64 = 3;
pub const STREAM_PLACEMENT: u64 = 4;
pub const STREAM_CORPUS: u64 = 5;
pub const STREAM_MIRROR: u64 = 6;
pub const STREAM_SCALING: u64 = 7;
pub const STREAM_NOISE: u64 = 8;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(master) ^ stream) ^ index)
}

/// FNV-1a hash of a string, for seeds keyed by labels.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
