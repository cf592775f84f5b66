//! Seed derivation and uniform variates.
//!
//! Every randomized operation in this crate keys its generator off a caller
//! seed plus structural indices (point index, sweep cell, trial number), so
//! outputs are reproducible and independent of evaluation order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, the usual seed expander.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with two salts into an independent stream seed.
pub fn derive_seed(base: u64, salt_a: u64, salt_b: u64) -> u64 {
    let mut s = base;
    let mut out = splitmix64(&mut s);
    s ^= salt_a.wrapping_mul(0xA076_1D64_78BD_642F);
    out ^= splitmix64(&mut s);
    s ^= salt_b.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    out ^ splitmix64(&mut s)
}

/// Deterministic stream generator for one derived seed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 random bits.
pub fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}
