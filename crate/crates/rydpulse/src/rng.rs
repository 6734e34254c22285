//! Deterministic RNG stream derivation.
//!
//! Every work unit (ensemble sample, GRAPE restart) owns a stream derived by
//! hashing the master seed together with its identifiers, so results do not
//! depend on worker count or scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derive an independent RNG stream from (master_seed, ids...).
pub fn stream(master_seed: u64, ids: &[u64]) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    for id in ids {
        hasher.update(id.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(seed)
}
