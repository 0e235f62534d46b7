//! Versioned, checksummed byte image of a filter.
//!
//! All integers are little-endian:
//!
//! | offset      | size          | field                                   |
//! |-------------|---------------|-----------------------------------------|
//! | 0           | 4             | magic `b"SBBF"`                         |
//! | 4           | 1             | format version, currently 1             |
//! | 5           | 4             | hasher id                               |
//! | 9           | 8             | number of buckets `n`                   |
//! | 17          | 32 n          | blocks, lane 0 first, lanes little-endian |
//! | 17 + 32 n   | 4             | CRC-32 (IEEE) of every preceding byte   |
//!
//! The layout is frozen at version 1.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::block::{Block, BLOCK_BYTES};
use crate::filter::SplitBlockFilter;
use crate::hash::HasherId;

pub const MAGIC: [u8; 4] = *b"SBBF";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 4 + 8;
pub const CHECKSUM_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("image length {actual} does not match the {expected} bytes its header implies")]
    Length { expected: u128, actual: usize },
    #[error("image too short: {actual} bytes, need at least {min}")]
    Truncated { actual: usize, min: usize },
    #[error("bad magic {0:02x?}, expected \"SBBF\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("header declares zero buckets")]
    ZeroBuckets,
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Corrupt { stored: u32, computed: u32 },
    #[error("cannot allocate a filter of {0} buckets")]
    Allocation(u64),
}

/// Total image length for `num_buckets` buckets.
pub fn image_len(num_buckets: usize) -> usize {
    HEADER_LEN + BLOCK_BYTES * num_buckets + CHECKSUM_LEN
}

/// Serializes `filter` into a fresh buffer.
pub fn serialize(filter: &SplitBlockFilter) -> Vec<u8> {
    let mut out = Vec::with_capacity(image_len(filter.num_buckets()));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&filter.hasher_id().0.to_le_bytes());
    out.extend_from_slice(&(filter.num_buckets() as u64).to_le_bytes());
    for block in filter.blocks() {
        out.extend_from_slice(&block.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn write_to<W: Write>(filter: &SplitBlockFilter, mut writer: W) -> Result<(), PersistError> {
    writer.write_all(&serialize(filter))?;
    writer.flush()?;
    Ok(())
}

/// Validates and decodes an image produced by [`serialize`].
///
/// Checks run in order: minimum length, magic, version, bucket count and
/// total length, then checksum.
pub fn deserialize(bytes: &[u8]) -> Result<SplitBlockFilter, PersistError> {
    let min = image_len(0);
    if bytes.len() < min {
        return Err(PersistError::Truncated {
            actual: bytes.len(),
            min,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(PersistError::BadMagic(magic));
    }
    if bytes[4] != VERSION {
        return Err(PersistError::UnsupportedVersion(bytes[4]));
    }
    let hasher = HasherId(u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")));
    let num_buckets = u64::from_le_bytes(bytes[9..17].try_into().expect("8 bytes"));
    if num_buckets == 0 {
        return Err(PersistError::ZeroBuckets);
    }
    let expected = (HEADER_LEN + CHECKSUM_LEN) as u128 + BLOCK_BYTES as u128 * num_buckets as u128;
    if expected != bytes.len() as u128 {
        return Err(PersistError::Length {
            expected,
            actual: bytes.len(),
        });
    }

    let (body, trailer) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(PersistError::Corrupt { stored, computed });
    }

    let num_buckets = num_buckets as usize;
    let mut blocks = Vec::new();
    blocks
        .try_reserve_exact(num_buckets)
        .map_err(|_| PersistError::Allocation(num_buckets as u64))?;
    blocks.extend(
        body[HEADER_LEN..]
            .chunks_exact(BLOCK_BYTES)
            .map(|chunk| Block::from_le_bytes(chunk.try_into().expect("32 bytes"))),
    );
    Ok(SplitBlockFilter::from_blocks(blocks, hasher))
}

pub fn read_from<R: Read>(mut reader: R) -> Result<SplitBlockFilter, PersistError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    deserialize(&bytes)
}

impl SplitBlockFilter {
    /// Shorthand for [`serialize`].
    pub fn to_bytes(&self) -> Vec<u8> {
        serialize(self)
    }

    /// Shorthand for [`deserialize`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PersistError> {
        deserialize(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{block_index, make_mask};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn populated(buckets: usize, adds: usize, seed: u64) -> SplitBlockFilter {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SplitBlockFilter::new(buckets).unwrap();
        for _ in 0..adds {
            f.add_hash(rng.gen());
        }
        f
    }

    #[test]
    fn single_bucket_layout() {
        let image = serialize(&SplitBlockFilter::new(1).unwrap());
        assert_eq!(image.len(), 53);
        assert_eq!(&image[..4], b"SBBF");
        assert_eq!(image[4], 1);
        assert_eq!(&image[5..9], &[0, 0, 0, 0]);
        assert_eq!(&image[9..17], &1u64.to_le_bytes());
        assert!(image[17..49].iter().all(|&b| b == 0));
        assert_eq!(&image[49..], &crc32fast::hash(&image[..49]).to_le_bytes());
    }

    #[test]
    fn hasher_id_recorded() {
        let f = SplitBlockFilter::with_hasher(2, HasherId::XXH3).unwrap();
        let image = serialize(&f);
        assert_eq!(&image[5..9], &1u32.to_le_bytes());
        assert_eq!(deserialize(&image).unwrap().hasher_id(), HasherId::XXH3);
    }

    #[test]
    fn one_add_changes_only_mask_bytes() {
        // Expected image computed lane by lane from the mask alone.
        let hash = 0x5555_AAAA_1234_5678u64;
        let mut f = SplitBlockFilter::new(4).unwrap();
        let empty = serialize(&f);
        f.add_hash(hash);
        let image = serialize(&f);

        let mut expected = empty.clone();
        let base = HEADER_LEN + BLOCK_BYTES * block_index(hash, 4) as usize;
        for (lane, bit) in make_mask(hash).lanes().iter().enumerate() {
            let at = base + 4 * lane;
            expected[at..at + 4].copy_from_slice(&bit.to_le_bytes());
        }
        let n = expected.len();
        let crc = crc32fast::hash(&expected[..n - 4]);
        expected[n - 4..].copy_from_slice(&crc.to_le_bytes());
        assert_eq!(image, expected);

        let changed: Vec<usize> = (0..n - 4).filter(|&i| image[i] != empty[i]).collect();
        assert_eq!(changed.len(), 8);
    }

    #[test]
    fn deterministic() {
        let f = populated(7, 50, 1);
        assert_eq!(serialize(&f), serialize(&f));
    }

    #[test]
    fn distinguishable_errors() {
        let good = serialize(&populated(3, 20, 2));

        assert!(matches!(deserialize(&[]), Err(PersistError::Truncated { .. })));

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(deserialize(&bad), Err(PersistError::BadMagic(_))));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(deserialize(&bad), Err(PersistError::UnsupportedVersion(2))));

        let mut bad = good.clone();
        bad[9..17].copy_from_slice(&0u64.to_le_bytes());
        assert!(matches!(deserialize(&bad), Err(PersistError::ZeroBuckets)));

        assert!(matches!(
            deserialize(&good[..good.len() - 1]),
            Err(PersistError::Length { .. })
        ));

        let mut bad = good.clone();
        bad[9..17].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(deserialize(&bad), Err(PersistError::Length { .. })));

        let mut bad = good.clone();
        bad[HEADER_LEN + 5] ^= 0x10;
        assert!(matches!(deserialize(&bad), Err(PersistError::Corrupt { .. })));

        let mut bad = good.clone();
        let last = bad.len() - 1;
        bad[last] ^= 1;
        assert!(matches!(deserialize(&bad), Err(PersistError::Corrupt { .. })));
    }

    #[test]
    fn reader_writer() {
        let f = populated(5, 40, 3);
        let mut buf = Vec::new();
        write_to(&f, &mut buf).unwrap();
        assert_eq!(read_from(buf.as_slice()).unwrap(), f);
    }

    proptest! {
        #[test]
        fn roundtrip(buckets in 1usize..64, hashes in prop::collection::vec(any::<u64>(), 0..200)) {
            let mut f = SplitBlockFilter::new(buckets).unwrap();
            f.bulk_add(&hashes);
            let back = deserialize(&serialize(&f)).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(serialize(&back), serialize(&f));
        }

        #[test]
        fn any_single_byte_flip_is_detected(pos in 0usize..image_len(2), bit in 0u8..8) {
            let f = populated(2, 10, 4);
            let mut image = serialize(&f);
            image[pos] ^= 1 << bit;
            prop_assert!(deserialize(&image).is_err());
        }
    }
}
