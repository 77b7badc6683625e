//! Seed derivation. Every stochastic step draws from its own ChaCha stream
//! keyed by the global seed plus a label path, so results do not depend on
//! evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Derive a 64-bit sub-seed from `seed` and a label path.
pub fn derive_seed(seed: u64, labels: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for label in labels {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream(seed: u64, labels: &[&str]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, labels))
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}
