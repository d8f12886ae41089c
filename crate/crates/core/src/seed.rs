//! Seed expansion.
//!
//! A run carries a single `u64` seed. Work item `i` of a run draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`, so items are
//! independent of one another and of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn item_rng(seed: u64, item: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(item);
    rng
}

/// Derives a sub-seed for a named phase of a run (sampling, bodies, ...),
/// so phases never share streams.
pub fn phase_seed(seed: u64, phase: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ phase.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
