//! Kernel selection: the portable lane loop, and an AVX2 path that processes
//! all eight lanes in one 256-bit register.
//!
//! Both kernels produce bit-identical blocks. The portable kernel is the
//! reference; the AVX2 kernel is differential-tested against it.

use crate::block::{Block, LANES};

/// Which implementation performs block updates and tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// Portable scalar loop over the eight lanes.
    Scalar,
    /// 256-bit AVX2 multiply, shift and test (x86-64 only).
    Avx2,
}

impl Kernel {
    /// The fastest kernel the running CPU supports.
    #[inline]
    pub fn detect() -> Kernel {
        if Kernel::Avx2.is_available() {
            Kernel::Avx2
        } else {
            Kernel::Scalar
        }
    }

    #[inline]
    pub fn is_available(self) -> bool {
        match self {
            Kernel::Scalar => true,
            #[cfg(target_arch = "x86_64")]
            Kernel::Avx2 => std::arch::is_x86_feature_detected!("avx2"),
            #[cfg(not(target_arch = "x86_64"))]
            Kernel::Avx2 => false,
        }
    }

    /// Falls back to [`Kernel::Scalar`] when `self` is unavailable.
    #[inline]
    pub(crate) fn resolve(self) -> Kernel {
        if self.is_available() {
            self
        } else {
            Kernel::Scalar
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Scalar => "scalar",
            Kernel::Avx2 => "avx2",
        }
    }
}

const _: () = assert!(LANES == 8, "the AVX2 kernel assumes eight 32-bit lanes");

#[cfg(target_arch = "x86_64")]
pub(crate) mod avx2 {
    use core::arch::x86_64::{
        __m256i, _mm256_load_si256, _mm256_loadu_si256, _mm256_mullo_epi32, _mm256_or_si256,
        _mm256_set1_epi32, _mm256_sllv_epi32, _mm256_srli_epi32, _mm256_store_si256,
        _mm256_testc_si256,
    };

    use crate::block::{block_index, Block, MaskSeeds};

    #[inline]
    #[target_feature(enable = "avx2")]
    unsafe fn make_mask(hash: u64) -> __m256i {
        let seeds = _mm256_loadu_si256(MaskSeeds::CANONICAL.lanes().as_ptr() as *const __m256i);
        let key = _mm256_set1_epi32(hash as u32 as i32);
        let bits = _mm256_srli_epi32::<27>(_mm256_mullo_epi32(seeds, key));
        _mm256_sllv_epi32(_mm256_set1_epi32(1), bits)
    }

    #[inline]
    #[target_feature(enable = "avx2")]
    unsafe fn slot(blocks: &[Block], hash: u64) -> *const __m256i {
        let index = block_index(hash, blocks.len() as u64) as usize;
        debug_assert!(index < blocks.len());
        blocks.as_ptr().add(index) as *const __m256i
    }

    #[inline]
    #[target_feature(enable = "avx2")]
    pub unsafe fn add_hash(blocks: &mut [Block], hash: u64) {
        let index = block_index(hash, blocks.len() as u64) as usize;
        debug_assert!(index < blocks.len());
        let bucket = blocks.as_mut_ptr().add(index) as *mut __m256i;
        _mm256_store_si256(bucket, _mm256_or_si256(_mm256_load_si256(bucket), make_mask(hash)));
    }

    #[inline]
    #[target_feature(enable = "avx2")]
    pub unsafe fn find_hash(blocks: &[Block], hash: u64) -> bool {
        _mm256_testc_si256(_mm256_load_si256(slot(blocks, hash)), make_mask(hash)) != 0
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn bulk_add(blocks: &mut [Block], hashes: &[u64]) {
        for &hash in hashes {
            add_hash(blocks, hash);
        }
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn bulk_find(blocks: &[Block], hashes: &[u64], out: &mut [bool]) {
        for (found, &hash) in out.iter_mut().zip(hashes) {
            *found = find_hash(blocks, hash);
        }
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn count_found(blocks: &[Block], hashes: &[u64]) -> usize {
        hashes.iter().filter(|&&h| find_hash(blocks, h)).count()
    }
}

// Safe wrappers. Callers must only pass `Kernel::Avx2` after resolving it,
// which is the only route by which these are reached.

#[cfg(target_arch = "x86_64")]
#[inline]
pub(crate) fn avx2_add(blocks: &mut [Block], hash: u64) {
    debug_assert!(Kernel::Avx2.is_available());
    // SAFETY: AVX2 support was checked by `Kernel::resolve`; the block index
    // is always below `blocks.len()` and blocks are 32-byte aligned.
    unsafe { avx2::add_hash(blocks, hash) }
}

#[cfg(target_arch = "x86_64")]
#[inline]
pub(crate) fn avx2_find(blocks: &[Block], hash: u64) -> bool {
    debug_assert!(Kernel::Avx2.is_available());
    // SAFETY: as in `avx2_add`.
    unsafe { avx2::find_hash(blocks, hash) }
}

#[cfg(target_arch = "x86_64")]
pub(crate) fn avx2_bulk_add(blocks: &mut [Block], hashes: &[u64]) {
    debug_assert!(Kernel::Avx2.is_available());
    // SAFETY: as in `avx2_add`.
    unsafe { avx2::bulk_add(blocks, hashes) }
}

#[cfg(target_arch = "x86_64")]
pub(crate) fn avx2_bulk_find(blocks: &[Block], hashes: &[u64], out: &mut [bool]) {
    debug_assert!(Kernel::Avx2.is_available());
    // SAFETY: as in `avx2_add`.
    unsafe { avx2::bulk_find(blocks, hashes, out) }
}

#[cfg(target_arch = "x86_64")]
pub(crate) fn avx2_count_found(blocks: &[Block], hashes: &[u64]) -> usize {
    debug_assert!(Kernel::Avx2.is_available());
    // SAFETY: as in `avx2_add`.
    unsafe { avx2::count_found(blocks, hashes) }
}
