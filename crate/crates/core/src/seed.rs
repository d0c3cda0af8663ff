//! Seed derivation.
//!
//! Every derived seed goes through the SplitMix64 finalizer:
//!
//! ```text
//! fmix(z):  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//!           z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//!           z ^ (z >> 31)
//! derive(seed, a)    = fmix(seed + 0x9e3779b97f4a7c15 * (a + 1))
//! derive2(seed, a, b) = derive(derive(seed, a), b)
//! ```
//!
//! All arithmetic wraps modulo 2^64. The constants are the published
//! SplitMix64 ones, so any implementation can reproduce a sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, stream: u64) -> u64 {
    fmix64(seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream.wrapping_add(1))))
}

pub fn derive2(seed: u64, a: u64, b: u64) -> u64 {
    derive(derive(seed, a), b)
}

/// The random source used by every generator in the crate.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
