use thiserror::Error;

use crate::block::{block_index, make_mask_probed, AccessLog, Block, NoProbe, Probe, BLOCK_BYTES};
use crate::hash::HasherId;
use crate::kernel::Kernel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("a filter needs at least one bucket")]
    ZeroBuckets,
    #[error("cannot allocate {bytes} bytes for the filter")]
    Allocation { bytes: u128 },
}

/// A split block Bloom filter over pre-hashed 64-bit values.
///
/// The filter is an array of 256-bit [`Block`]s. Adding a hash selects one
/// block with [`block_index`](crate::block_index) and ORs in the hash's
/// [`LaneMask`](crate::LaneMask); looking a hash up tests that every mask
/// bit is already set. Each operation reads or writes exactly one block and
/// evaluates exactly eight lane hashes, whatever the filter size.
///
/// There is no delete and no occupancy counter: bits are only ever set.
///
/// Any number of threads may call the `&self` methods at once. Mutation
/// needs `&mut self`, so writers are serialized by the borrow checker or by
/// whatever lock the caller wraps the filter in.
///
/// ```
/// use sbbf::SplitBlockFilter;
///
/// let mut filter = SplitBlockFilter::new(4096).unwrap();
/// filter.add_hash(0x9E37_79B9_7F4A_7C15);
/// assert!(filter.find_hash(0x9E37_79B9_7F4A_7C15));
/// assert_eq!(filter.size_bytes(), 131_072);
/// ```
#[derive(Clone, PartialEq, Eq)]
pub struct SplitBlockFilter {
    blocks: Vec<Block>,
    hasher: HasherId,
}

macro_rules! dispatch {
    ($kernel:expr, scalar => $scalar:expr, avx2 => $avx2:expr $(,)?) => {
        match $kernel.resolve() {
            #[cfg(target_arch = "x86_64")]
            Kernel::Avx2 => $avx2,
            _ => $scalar,
        }
    };
}

impl SplitBlockFilter {
    /// An all-zero filter of `num_buckets` blocks, tagged with
    /// [`HasherId::RAW`].
    pub fn new(num_buckets: usize) -> Result<Self, BuildError> {
        Self::with_hasher(num_buckets, HasherId::RAW)
    }

    pub fn with_hasher(num_buckets: usize, hasher: HasherId) -> Result<Self, BuildError> {
        if num_buckets == 0 {
            return Err(BuildError::ZeroBuckets);
        }
        let mut blocks = Vec::new();
        blocks
            .try_reserve_exact(num_buckets)
            .map_err(|_| BuildError::Allocation {
                bytes: num_buckets as u128 * BLOCK_BYTES as u128,
            })?;
        blocks.resize(num_buckets, Block::ZERO);
        Ok(Self { blocks, hasher })
    }

    /// A filter of at least `bytes` bytes, rounded up to whole blocks.
    pub fn with_bytes(bytes: usize) -> Result<Self, BuildError> {
        Self::new(bytes.div_ceil(BLOCK_BYTES))
    }

    pub(crate) fn from_blocks(blocks: Vec<Block>, hasher: HasherId) -> Self {
        debug_assert!(!blocks.is_empty());
        Self { blocks, hasher }
    }

    #[inline]
    pub fn num_buckets(&self) -> usize {
        self.blocks.len()
    }

    /// Size of the bit array in bytes (32 per bucket).
    #[inline]
    pub fn size_bytes(&self) -> usize {
        self.blocks.len() * BLOCK_BYTES
    }

    /// Size of the bit array in bits.
    #[inline]
    pub fn size_bits(&self) -> u64 {
        self.size_bytes() as u64 * 8
    }

    #[inline]
    pub fn hasher_id(&self) -> HasherId {
        self.hasher
    }

    pub fn set_hasher_id(&mut self, hasher: HasherId) {
        self.hasher = hasher;
    }

    #[inline]
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Number of set bits across the whole filter.
    pub fn count_ones(&self) -> u64 {
        self.blocks.iter().map(|b| u64::from(b.count_ones())).sum()
    }

    /// Resets every bit to zero, keeping the allocation.
    pub fn clear(&mut self) {
        self.blocks.fill(Block::ZERO);
    }

    #[inline]
    pub fn add_hash(&mut self, hash: u64) {
        self.add_hash_with(Kernel::detect(), hash);
    }

    #[inline]
    pub fn find_hash(&self, hash: u64) -> bool {
        self.find_hash_with(Kernel::detect(), hash)
    }

    /// Adds `hash` using a specific kernel. An unavailable kernel falls back
    /// to [`Kernel::Scalar`].
    #[inline]
    pub fn add_hash_with(&mut self, kernel: Kernel, hash: u64) {
        dispatch!(kernel,
            scalar => self.add_hash_probed(hash, &mut NoProbe),
            avx2 => crate::kernel::avx2_add(&mut self.blocks, hash),
        )
    }

    #[inline]
    pub fn find_hash_with(&self, kernel: Kernel, hash: u64) -> bool {
        dispatch!(kernel,
            scalar => self.find_hash_probed(hash, &mut NoProbe),
            avx2 => crate::kernel::avx2_find(&self.blocks, hash),
        )
    }

    /// Portable reference insert, reporting every block access and lane hash
    /// to `probe`.
    #[inline]
    pub fn add_hash_probed<P: Probe>(&mut self, hash: u64, probe: &mut P) {
        let index = block_index(hash, self.blocks.len() as u64) as usize;
        let mask = make_mask_probed(hash, probe);
        probe.block_read(index);
        let block = &mut self.blocks[index];
        block.insert(&mask);
        probe.block_write(index);
    }

    /// Portable reference lookup, reporting to `probe`.
    #[inline]
    pub fn find_hash_probed<P: Probe>(&self, hash: u64, probe: &mut P) -> bool {
        let index = block_index(hash, self.blocks.len() as u64) as usize;
        let mask = make_mask_probed(hash, probe);
        probe.block_read(index);
        self.blocks[index].contains(&mask)
    }

    /// Convenience wrapper returning the access log of a single insert.
    pub fn trace_add(&mut self, hash: u64) -> AccessLog {
        let mut log = AccessLog::new();
        self.add_hash_probed(hash, &mut log);
        log
    }

    /// Convenience wrapper returning the result and access log of a lookup.
    pub fn trace_find(&self, hash: u64) -> (bool, AccessLog) {
        let mut log = AccessLog::new();
        let found = self.find_hash_probed(hash, &mut log);
        (found, log)
    }

    pub fn bulk_add(&mut self, hashes: &[u64]) {
        self.bulk_add_with(Kernel::detect(), hashes);
    }

    pub fn bulk_add_with(&mut self, kernel: Kernel, hashes: &[u64]) {
        dispatch!(kernel,
            scalar => {
                for &hash in hashes {
                    self.add_hash_probed(hash, &mut NoProbe);
                }
            },
            avx2 => crate::kernel::avx2_bulk_add(&mut self.blocks, hashes),
        )
    }

    pub fn bulk_find(&self, hashes: &[u64]) -> Vec<bool> {
        let mut out = vec![false; hashes.len()];
        self.bulk_find_into(Kernel::detect(), hashes, &mut out);
        out
    }

    /// Writes one result per hash into `out`.
    ///
    /// # Panics
    ///
    /// If `out.len() != hashes.len()`.
    pub fn bulk_find_into(&self, kernel: Kernel, hashes: &[u64], out: &mut [bool]) {
        assert_eq!(hashes.len(), out.len(), "output length must match input");
        dispatch!(kernel,
            scalar => {
                for (found, &hash) in out.iter_mut().zip(hashes) {
                    *found = self.find_hash_probed(hash, &mut NoProbe);
                }
            },
            avx2 => crate::kernel::avx2_bulk_find(&self.blocks, hashes, out),
        )
    }

    /// How many of `hashes` the filter reports as possibly present.
    pub fn count_found(&self, kernel: Kernel, hashes: &[u64]) -> usize {
        dispatch!(kernel,
            scalar => hashes
                .iter()
                .filter(|&&h| self.find_hash_probed(h, &mut NoProbe))
                .count(),
            avx2 => crate::kernel::avx2_count_found(&self.blocks, hashes),
        )
    }
}

impl std::fmt::Debug for SplitBlockFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitBlockFilter")
            .field("num_buckets", &self.num_buckets())
            .field("hasher", &self.hasher)
            .field("ones", &self.count_ones())
            .finish()
    }
}
