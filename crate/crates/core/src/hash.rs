//! Turning byte-string keys into the 64-bit hash values the filter consumes.
//!
//! The filter itself only sees `u64` hashes. A [`HasherId`] records which
//! frontend produced them so that a serialized filter can be queried with the
//! same function it was built with.
//!
//! | id | name  | algorithm                                     |
//! |----|-------|-----------------------------------------------|
//! | 0  | raw   | none; the caller supplies 64-bit hashes       |
//! | 1  | xxh3  | XXH3-64 of the key bytes, with a 64-bit seed  |
//!
//! Ids are never reused or redefined.

use std::fmt;

use xxhash_rust::xxh3::xxh3_64_with_seed;

/// Tag identifying the key-hashing frontend a filter was built with.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HasherId(pub u32);

impl HasherId {
    /// Caller-supplied hashes; no key hashing.
    pub const RAW: HasherId = HasherId(0);
    /// [`hash_key`]: XXH3-64 over the key bytes.
    pub const XXH3: HasherId = HasherId(1);

    pub fn name(self) -> Option<&'static str> {
        match self {
            HasherId::RAW => Some("raw"),
            HasherId::XXH3 => Some("xxh3"),
            _ => None,
        }
    }
}

impl fmt::Debug for HasherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(name) => write!(f, "HasherId({}:{name})", self.0),
            None => write!(f, "HasherId({}:unknown)", self.0),
        }
    }
}

impl fmt::Display for HasherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(name) => write!(f, "{name} ({})", self.0),
            None => write!(f, "unknown ({})", self.0),
        }
    }
}

/// Seed used by filters tagged [`HasherId::XXH3`]. Serialized filters do not
/// carry a seed, so key-level filters always use this one.
pub const DEFAULT_KEY_SEED: u64 = 0;

/// Hashes an arbitrary byte string. The empty key is legal.
#[inline]
pub fn hash_key(key: &[u8], seed: u64) -> u64 {
    xxh3_64_with_seed(key, seed)
}

/// Hashes an integer key through its 8-byte little-endian encoding.
#[inline]
pub fn hash_u64(value: u64, seed: u64) -> u64 {
    hash_key(&value.to_le_bytes(), seed)
}

#[inline]
pub fn hash_str(value: &str, seed: u64) -> u64 {
    hash_key(value.as_bytes(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::block_index;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic() {
        // Frozen outputs; a change here breaks every serialized key filter.
        assert_eq!(hash_key(b"", 0), 0x2d06_8005_38d3_94c2);
        assert_eq!(hash_key(b"hello", 0), hash_key(b"hello", 0));
        assert_ne!(hash_key(b"hello", 0), hash_key(b"hello", 1));
        assert_eq!(hash_u64(7, 3), hash_key(&7u64.to_le_bytes(), 3));
        assert_eq!(hash_str("abc", 9), hash_key(b"abc", 9));
    }

    #[test]
    fn ids() {
        assert_eq!(HasherId::RAW.0, 0);
        assert_eq!(HasherId::XXH3.0, 1);
        assert_eq!(HasherId(77).name(), None);
    }

    #[test]
    fn avalanche() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA7A1);
        let trials = 100_000;
        let mut flips = [0u32; 64];
        for _ in 0..trials {
            let len = rng.gen_range(1..=32);
            let mut key: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let seed = rng.gen();
            let before = hash_key(&key, seed);
            let bit = rng.gen_range(0..len * 8);
            key[bit / 8] ^= 1 << (bit % 8);
            let diff = before ^ hash_key(&key, seed);
            for (i, count) in flips.iter_mut().enumerate() {
                *count += ((diff >> i) & 1) as u32;
            }
        }
        for (i, &count) in flips.iter().enumerate() {
            let freq = f64::from(count) / trials as f64;
            assert!((freq - 0.5).abs() <= 0.02, "output bit {i} flipped {freq}");
        }
    }

    // Critical value of chi-square with 63 degrees of freedom at p = 1e-6.
    const CHI2_63: f64 = 126.0;

    fn chi_square(counts: &[u64], expected: f64) -> f64 {
        counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    }

    #[test]
    fn buckets_uniform_for_each_seed() {
        let keys = 64_000u64;
        for seed in 0..16u64 {
            let mut counts = [0u64; 64];
            for k in 0..keys {
                counts[block_index(hash_u64(k, seed), 64) as usize] += 1;
            }
            let chi = chi_square(&counts, keys as f64 / 64.0);
            assert!(chi < CHI2_63, "seed {seed}: chi-square {chi}");
        }
    }

    #[test]
    fn seeds_give_independent_buckets() {
        // Joint 8x8 histogram of bucket assignments under two seeds.
        let keys = 64_000u64;
        for seed in 0..15u64 {
            let mut joint = [0u64; 64];
            for k in 0..keys {
                let a = block_index(hash_u64(k, seed), 8);
                let b = block_index(hash_u64(k, seed + 1), 8);
                joint[(a * 8 + b) as usize] += 1;
            }
            let chi = chi_square(&joint, keys as f64 / 64.0);
            assert!(chi < CHI2_63, "seeds {seed},{}: chi-square {chi}", seed + 1);
        }
    }
}
