//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 stream. The 256-bit
//! key is the base seed in little-endian order followed by 24 zero bytes, the
//! 64-bit stream id is the sample index and the block counter starts at zero.
//! Sample `k` of a run seeded with `s` is therefore reproducible from `(s, k)`
//! alone, independently of how many other samples were drawn or in which
//! order they ran.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type SampleRng = ChaCha20Rng;

pub fn sample_stream(base_seed: u64, sample: u64) -> SampleRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(sample);
    rng
}

/// Uniform draw from `[0, 1)` with 53 random bits: `(next_u64 >> 11) * 2^-53`.
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw from `[-spread, spread)`.
pub fn symmetric_f64<R: RngCore + ?Sized>(rng: &mut R, spread: f64) -> f64 {
    spread * (2.0 * unit_f64(rng) - 1.0)
}
