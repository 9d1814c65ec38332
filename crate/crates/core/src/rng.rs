//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 stream keyed by a
//! 64-bit seed. The 32-byte ChaCha key is the little-endian concatenation of
//! four successive SplitMix64 outputs started at that seed, so a stream is
//! fully specified by `(seed, ChaCha20)` independently of the `rand` version.
//!
//! Sub-seeds are derived with [`mix`], which folds each label into the seed
//! through one SplitMix64 finalizer round: `h = splitmix64(h ^ label)`.
//! Derived seeds depend only on the labels, never on scheduling, so a single
//! (cell, realization) can be regenerated in isolation.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a sequence of labels.
pub fn mix(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(seed, |h, &label| {
        let mut s = h ^ label;
        splitmix64(&mut s)
    })
}

/// Label used to separate the ESP-index trial stream from the reservoir stream.
pub const ESP_STREAM: u64 = 0x4553_505f_494e_4458;

pub struct Stream(ChaCha20Rng);

impl Stream {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut sm).to_le_bytes());
        }
        Stream(ChaCha20Rng::from_seed(key))
    }

    /// Uniform on [-1, 1): `2 * (k / 2^53) - 1` with `k` the top 53 bits of a draw.
    pub fn symmetric(&mut self) -> f64 {
        let k = self.0.next_u64() >> 11;
        2.0 * (k as f64 / (1u64 << 53) as f64) - 1.0
    }

    /// Uniform on the open interval (-1, 1): `2 * ((k + 0.5) / 2^53) - 1`.
    pub fn symmetric_open(&mut self) -> f64 {
        let k = self.0.next_u64() >> 11;
        2.0 * ((k as f64 + 0.5) / (1u64 << 53) as f64) - 1.0
    }

    /// Standard normal draw (Box-Muller on two open-interval uniforms).
    pub fn normal(&mut self) -> f64 {
        let u1 = 0.5 * (self.symmetric_open() + 1.0);
        let u2 = 0.5 * (self.symmetric_open() + 1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
