//! Seed derivation and keyed random streams.
//!
//! Every random quantity in the crate comes from a ChaCha stream whose 256-bit
//! key is an injective packing of `(seed, domain, index, extra)`. Two streams
//! with different keys never alias, so matrices, noise and initializations can
//! be regenerated independently and in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Each consumer of randomness uses its own tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Matrix = 1,
    PreQuantNoise = 2,
    SymbolFlip = 3,
    Init = 4,
    Signal = 5,
    Lambda = 6,
    Width = 7,
    Derive = 8,
}

/// Deterministic stream keyed by `(seed, domain, index, extra)`.
pub fn keyed_rng(seed: u64, domain: Domain, index: u64, extra: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&extra.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a list of words into a new 64-bit seed.
///
/// Used for per-trial seeds in experiment sweeps; not a cryptographic hash.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(base ^ (Domain::Derive as u64).rotate_left(32));
    for &w in words {
        h = splitmix64(h ^ splitmix64(w));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn keyed_streams_are_reproducible_and_distinct() {
        let a: u64 = keyed_rng(7, Domain::Matrix, 0, 0).random();
        let b: u64 = keyed_rng(7, Domain::Matrix, 0, 0).random();
        let c: u64 = keyed_rng(7, Domain::Matrix, 1, 0).random();
        let d: u64 = keyed_rng(7, Domain::PreQuantNoise, 0, 0).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn derive_seed_depends_on_every_word() {
        let base = derive_seed(1, &[2, 3]);
        assert_eq!(base, derive_seed(1, &[2, 3]));
        assert_ne!(base, derive_seed(1, &[3, 2]));
        assert_ne!(base, derive_seed(2, &[2, 3]));
        assert_ne!(base, derive_seed(1, &[2, 3, 0]));
    }
}
