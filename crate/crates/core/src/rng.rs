//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha20 (a counter-based stream
//! cipher generator). A master `u64` seed is expanded into the 256-bit key by
//! `SeedableRng::seed_from_u64`, and independent sub-streams are selected
//! through ChaCha's 64-bit stream id, so results never depend on thread
//! scheduling or platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::scalar::Real;

pub type PtRng = ChaCha20Rng;

/// Generator for a master seed, stream 0.
pub fn seeded(seed: u64) -> PtRng {
    PtRng::seed_from_u64(seed)
}

/// Generator for sub-stream `stream` of the key derived from `(seed, epoch)`.
///
/// `epoch` separates phases (time steps, restarts); `stream` separates
/// parallel workers within a phase.
pub fn substream(seed: u64, epoch: u64, stream: u64) -> PtRng {
    let mut rng = PtRng::seed_from_u64(splitmix64(seed ^ splitmix64(epoch.wrapping_add(0x9E37_79B9))));
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer, used to decorrelate derived seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws an index from an (unnormalized, non-negative) weight vector.
pub fn categorical<T: Real, R: Rng + ?Sized>(rng: &mut R, weights: &[T]) -> usize {
    let total: f64 = weights.iter().map(|w| w.as_f64()).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.iter().enumerate() {
        let w = w.as_f64();
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}
