//! Deterministic seed derivation.
//!
//! Every random stream in a run is derived from one master seed. A child seed is
//! the first eight bytes (little endian) of `SHA-256(master_le_bytes || label)`,
//! so streams for different purposes never overlap and adding a new stream does
//! not perturb existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed from `master` for the purpose named by `label`.
pub fn child_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// RNG for the stream labelled `label` under `master`.
pub fn rng_for(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, label))
}
