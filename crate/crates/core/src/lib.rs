//! Split block Bloom filters.
//!
//! A split block Bloom filter is a Bloom filter whose bit array is cut into
//! 256-bit blocks. A key is hashed once to choose a block, and then eight
//! more times, cheaply, to choose one bit in each of the block's eight 32-bit
//! lanes. Inserting ORs those eight bits in; looking up checks that all eight
//! are set. Every operation touches a single block and does a fixed amount
//! of work, no matter how large the filter is or what false positive rate it
//! was sized for.
//!
//! The crate has four parts:
//!
//! * [`SplitBlockFilter`] with its [`Block`], [`LaneMask`],
//!   [`block_index`] and [`make_mask`] building blocks, and a portable and
//!   an AVX2 [`Kernel`] that produce identical bits;
//! * [`hash`], the byte-string frontend that produces the 64-bit hashes;
//! * [`model`], the false positive model, sizing and comparison against
//!   standard Bloom filters;
//! * [`persist`], the on-disk format.
//!
//! ```
//! use sbbf::{hash::hash_str, size_for, SplitBlockFilter};
//!
//! let sized = size_for(1_000, 0.01).unwrap();
//! let mut filter = SplitBlockFilter::new(sized.num_buckets as usize).unwrap();
//! for word in ["apple", "banana", "cherry"] {
//!     filter.add_hash(hash_str(word, 0));
//! }
//! assert!(filter.find_hash(hash_str("banana", 0)));
//! ```

pub mod block;
mod filter;
pub mod hash;
mod kernel;
pub mod model;
pub mod persist;

pub use block::{
    block_index, make_mask, AccessLog, Block, LaneMask, MaskSeeds, NoProbe, Probe, BLOCK_BITS,
    BLOCK_BYTES, LANES, LANE_BITS,
};
pub use filter::{BuildError, SplitBlockFilter};
pub use hash::{hash_key, HasherId};
pub use kernel::Kernel;
pub use model::{
    sbbf_fpp, sbbf_fpp_mc, size_for, standard_bloom_fpp, within_2x_report, FppModel, HashCount,
    ModelError, SizingResult,
};
pub use persist::{deserialize, serialize, PersistError};
