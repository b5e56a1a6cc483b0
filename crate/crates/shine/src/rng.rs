//! Named seeded random sub-streams.
//!
//! All randomness in the crate flows from a single root seed through named
//! sub-streams, so individual stages (split, init, shuffle, synth) stay
//! reproducible no matter which other stages run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive an independent RNG for `label` from the root `seed`.
pub fn sub_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Sub-stream that also depends on a counter (e.g. the epoch number).
pub fn sub_rng_indexed(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    sub_rng(seed, &format!("{label}:{index}"))
}
