//! Deterministic random-number streams.
//!
//! Every stochastic operation in this crate draws from a ChaCha12 stream
//! derived from a root seed plus a path of integers (purpose tag, epoch,
//! sequence index, time step, chain index, ...). Work items therefore own
//! independent streams regardless of how many worker threads execute them,
//! which is what makes byte-identical output across thread counts possible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream purpose tags, the first element of every derivation path.
pub mod tag {
    /// Contrastive-divergence model chains inside training.
    pub const CD: u64 = 1;
    /// Per-epoch evaluation rollouts inside training.
    pub const EVAL: u64 = 2;
    /// Sequence simulators.
    pub const SIM: u64 = 3;
    /// Transition-rule Gibbs chains.
    pub const RULES: u64 = 4;
    /// Prediction rollouts launched outside training.
    pub const PREDICT: u64 = 5;
    /// Parameter initialization.
    pub const INIT: u64 = 6;
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse a seed and a derivation path into a single 64-bit key.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut acc = mix(seed ^ (path.len() as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    for &p in path {
        acc = mix(acc ^ p.wrapping_mul(GAMMA));
    }
    acc
}

/// Build the ChaCha12 stream for `(seed, path)`.
pub fn derive_rng(seed: u64, path: &[u64]) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let mut acc = derive_seed(seed, path);
    for chunk in key.chunks_mut(8) {
        acc = mix(acc);
        chunk.copy_from_slice(&acc.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}
