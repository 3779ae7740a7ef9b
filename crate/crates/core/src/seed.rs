//! Seed derivation.
//!
//! Every random stream is keyed by a master `u64` and a text label:
//! `seed = first 8 bytes (little endian) of SHA-256("dqi-seed-v1" || 0x00 || label || 0x00 || master_le)`.
//! Streams are ChaCha8 generators seeded with that value.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use sha2::{Digest, Sha256};

pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"dqi-seed-v1");
    h.update([0u8]);
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update(master.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

pub fn stream(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label))
}
