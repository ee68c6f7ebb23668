//! Deterministic seed fan-out.
//!
//! Every randomised component derives its own stream from one master
//! seed, a component label and optional indices, so parallel execution
//! order can never change results. The derivation is FNV-1a over the
//! master seed bytes, the label and the indices, finalised with a
//! splitmix64 scramble.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `(master, label, indices)`.
pub fn derive(master: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    h = fnv1a(h, label.as_bytes());
    for &i in indices {
        h = fnv1a(h, &i.to_le_bytes());
    }
    splitmix64(h)
}

/// ChaCha stream seeded by [`derive`].
pub fn rng(master: u64, label: &str, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, label, indices))
}

/// FNV-1a over arbitrary bytes, used for content hashes (e.g. config
/// fingerprints and feature-group identities).
pub fn content_hash(bytes: &[u8]) -> u64 {
    splitmix64(fnv1a(FNV_OFFSET, bytes))
}
