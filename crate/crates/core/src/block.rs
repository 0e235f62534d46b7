//! The 256-bit block, the per-lane mask, and block selection.
//!
//! A block is eight contiguous 32-bit lanes. Every key touches exactly one
//! block and sets (or tests) exactly one bit in each lane of it. Lane `i`
//! covers bits `[32 * i, 32 * i + 32)` of the block, and lane 0 is the
//! lowest-addressed word.

use std::fmt;

/// Number of 32-bit lanes in a block.
pub const LANES: usize = 8;
/// Width of one lane in bits.
pub const LANE_BITS: u32 = 32;
/// Width of one block in bits.
pub const BLOCK_BITS: u32 = LANES as u32 * LANE_BITS;
/// Width of one block in bytes.
pub const BLOCK_BYTES: usize = BLOCK_BITS as usize / 8;

/// The eight odd multipliers of the per-lane multiply-shift hash.
///
/// These values are part of the serialized format: a filter written by one
/// build must answer identically when read by another, so they never change.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaskSeeds([u32; LANES]);

impl MaskSeeds {
    /// Lane 0 first. The pairs come from four packed 64-bit words read
    /// low half then high half, so each adjacent pair appears swapped
    /// relative to a big-endian listing of those words.
    pub const CANONICAL: MaskSeeds = MaskSeeds([
        0x44974d91, 0x47b6137b, 0xa2b7289d, 0x8824ad5b, 0x2df1424b, 0x705495c7, 0x5c6bfb31,
        0x9efc4947,
    ]);

    pub const fn lanes(&self) -> &[u32; LANES] {
        &self.0
    }
}

/// Instrumentation hooks for the portable reference path.
///
/// The portable kernel is generic over a `Probe`; production calls use
/// [`NoProbe`], which compiles away. [`AccessLog`] records what a single
/// operation touched, which is how the constant-work property is checked.
pub trait Probe {
    fn block_read(&mut self, _index: usize) {}
    fn block_write(&mut self, _index: usize) {}
    fn lane_hash(&mut self, _lane: usize) {}
}

/// Probe that records nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoProbe;

impl Probe for NoProbe {}

/// Probe that logs every block access and lane-hash evaluation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AccessLog {
    pub reads: Vec<usize>,
    pub writes: Vec<usize>,
    pub lane_hashes: Vec<usize>,
}

impl AccessLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Distinct block indices that were read or written.
    pub fn blocks_touched(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.reads.iter().chain(&self.writes).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn clear(&mut self) {
        self.reads.clear();
        self.writes.clear();
        self.lane_hashes.clear();
    }
}

impl Probe for AccessLog {
    fn block_read(&mut self, index: usize) {
        self.reads.push(index);
    }

    fn block_write(&mut self, index: usize) {
        self.writes.push(index);
    }

    fn lane_hash(&mut self, lane: usize) {
        self.lane_hashes.push(lane);
    }
}

/// A 256-bit value with exactly one bit set in every lane.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LaneMask([u32; LANES]);

impl LaneMask {
    pub const fn lanes(&self) -> &[u32; LANES] {
        &self.0
    }

    /// Position of the set bit in each lane, each in `[0, 32)`.
    pub fn bit_indices(&self) -> [u32; LANES] {
        self.0.map(u32::trailing_zeros)
    }
}

impl fmt::Debug for LaneMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.iter().map(|lane| format!("{lane:#010x}")))
            .finish()
    }
}

/// One 256-bit bucket of the filter.
///
/// Aligned to 32 bytes so a block never straddles a cache line and can be
/// loaded as a single 256-bit vector.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
#[repr(C, align(32))]
pub struct Block([u32; LANES]);

impl Block {
    pub const ZERO: Block = Block([0; LANES]);

    pub const fn from_lanes(lanes: [u32; LANES]) -> Self {
        Block(lanes)
    }

    pub const fn lanes(&self) -> &[u32; LANES] {
        &self.0
    }

    /// Sets every bit of `mask`.
    #[inline]
    pub fn insert(&mut self, mask: &LaneMask) {
        for (lane, bit) in self.0.iter_mut().zip(mask.0) {
            *lane |= bit;
        }
    }

    /// True iff every bit of `mask` is set, i.e. `!block & mask == 0`.
    #[inline]
    pub fn contains(&self, mask: &LaneMask) -> bool {
        self.0
            .iter()
            .zip(mask.0)
            .fold(0, |missing, (lane, bit)| missing | (!lane & bit))
            == 0
    }

    pub fn count_ones(&self) -> u32 {
        self.0.iter().map(|lane| lane.count_ones()).sum()
    }

    /// Canonical byte image: lane 0 first, each lane little-endian.
    pub fn to_le_bytes(&self) -> [u8; BLOCK_BYTES] {
        let mut out = [0u8; BLOCK_BYTES];
        for (chunk, lane) in out.chunks_exact_mut(4).zip(self.0) {
            chunk.copy_from_slice(&lane.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8; BLOCK_BYTES]) -> Self {
        let mut lanes = [0u32; LANES];
        for (lane, chunk) in lanes.iter_mut().zip(bytes.chunks_exact(4)) {
            *lane = u32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        }
        Block(lanes)
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.iter().map(|lane| format!("{lane:#010x}")))
            .finish()
    }
}

/// Maps a 64-bit hash onto `[0, num_buckets)` by taking the high word of the
/// 128-bit product `hash * num_buckets`.
///
/// Any positive bucket count works; there is no power-of-two requirement.
/// `num_buckets` must be nonzero, which filter construction guarantees.
#[inline]
pub fn block_index(hash: u64, num_buckets: u64) -> u64 {
    debug_assert!(num_buckets > 0);
    ((u128::from(hash) * u128::from(num_buckets)) >> 64) as u64
}

/// Builds the lane mask for `hash`.
///
/// Only the low 32 bits of the hash participate. Lane `i` gets bit
/// `(seed[i] * low32(hash) mod 2^32) >> 27`.
#[inline]
pub fn make_mask(hash: u64) -> LaneMask {
    make_mask_probed(hash, &mut NoProbe)
}

#[inline]
pub(crate) fn make_mask_probed<P: Probe>(hash: u64, probe: &mut P) -> LaneMask {
    let key = hash as u32;
    let seeds = MaskSeeds::CANONICAL.0;
    let mut lanes = [0u32; LANES];
    for (i, (lane, seed)) in lanes.iter_mut().zip(seeds).enumerate() {
        probe.lane_hash(i);
        *lane = 1 << (key.wrapping_mul(seed) >> (LANE_BITS - 5));
    }
    LaneMask(lanes)
}
