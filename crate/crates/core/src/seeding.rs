//! Deterministic per-context random generators.
//!
//! Seeds are mixed with a stable FNV-1a hash of a context label so that
//! work items (names, nodes) can be processed in any order or on any
//! worker without changing the random stream each one sees.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Stable 64-bit FNV-1a over arbitrary bytes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// A generator derived from `seed` and a context label.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h = fnv1a(label.as_bytes());
    h ^= seed.rotate_left(17);
    ChaCha8Rng::seed_from_u64(h)
}

/// Samples `amount` distinct indices from `0..len` via partial
/// Fisher-Yates; deterministic for a given generator state.
pub fn sample_indices<R: Rng>(rng: &mut R, len: usize, amount: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..len).collect();
    let amount = amount.min(len);
    for i in 0..amount {
        let j = rng.random_range(i..len);
        indices.swap(i, j);
    }
    indices.truncate(amount);
    indices
}
