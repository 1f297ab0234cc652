//! Reproducible randomness.
//!
//! Every random stream in the crate is a ChaCha20 generator
//! ([`rand_chacha::ChaCha20Rng`]) seeded through
//! [`SeedableRng::seed_from_u64`] with a 64-bit key derived from one
//! top-level seed, a component label and an index:
//!
//! ```text
//! key = splitmix64(splitmix64(seed ^ fnv1a64(label)) ^ index)
//! ```
//!
//! Monte Carlo trials use the trial number as `index`, so each trial's
//! stream is independent of execution order and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// FNV-1a over the UTF-8 bytes of `label`.
pub fn fnv1a64(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ fnv1a64(label)) ^ index)
}

/// Generator for component `label`, stream `index`.
pub fn stream(seed: u64, label: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, label, index))
}
