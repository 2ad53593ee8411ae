//! Deterministic RNG stream derivation.
//!
//! Every random component of the crate draws from a ChaCha12 stream derived
//! from a master seed plus one or more stream tags (tree index, replicate
//! index, repetition index, ...). Derivation is a pure integer hash, so
//! parallel and serial execution consume identical streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; good avalanche for stream separation.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine a seed with an ordered list of stream tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut s = mix64(seed ^ 0x5851_f42d_4c95_7f2d);
    for &t in tags {
        s = mix64(s ^ mix64(t));
    }
    s
}

/// ChaCha12 stream for `(seed, tags...)`.
pub fn stream_rng(seed: u64, tags: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(seed, tags))
}

/// Stable tags for the crate's named streams.
pub mod tag {
    pub const SPLIT: u64 = 0x01;
    pub const TREE: u64 = 0x02;
    pub const BOOTSTRAP: u64 = 0x03;
    pub const COVARIATES: u64 = 0x04;
    pub const TREATMENT: u64 = 0x05;
    pub const NOISE: u64 = 0x06;
    pub const CATE: u64 = 0x07;
    pub const BETA: u64 = 0x08;
    pub const MISSPEC: u64 = 0x09;
    pub const MEAN_MODEL: u64 = 0x0a;
    pub const QUANTILE_MODEL: u64 = 0x0b;
    pub const REP: u64 = 0x0c;
    pub const CELL: u64 = 0x0d;
}
