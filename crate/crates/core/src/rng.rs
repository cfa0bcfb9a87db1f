//! Seed plumbing.
//!
//! Every stochastic component draws from a seed derived from one root seed
//! and a component label, so components can be varied independently while a
//! whole run stays reproducible. Element-level randomness (dropout masks,
//! key sampling) is counter based: the value at position `i` depends only on
//! `(seed, i)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a string label.
pub fn derive_seed(parent: u64, label: &str) -> u64 {
    // FNV-1a over the label, then mixed with the parent.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(parent ^ splitmix64(h))
}

/// Derive a child seed from a parent seed and an index.
pub fn derive_index(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Uniform draw in `[0, 1)` at position `counter` of the stream `seed`.
pub fn counter_uniform(seed: u64, counter: u64) -> f64 {
    let bits = derive_index(seed, counter) >> 11;
    bits as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A seeded generator for bulk draws (initialisation, shuffling, simulation).
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named sub-seeds of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubSeeds {
    pub data: u64,
    pub init: u64,
    pub dropout: u64,
    pub shuffle: u64,
    pub search: u64,
}

impl SubSeeds {
    pub fn from_root(root: u64) -> Self {
        Self {
            data: derive_seed(root, "data"),
            init: derive_seed(root, "init"),
            dropout: derive_seed(root, "dropout"),
            shuffle: derive_seed(root, "shuffle"),
            search: derive_seed(root, "search"),
        }
    }
}
