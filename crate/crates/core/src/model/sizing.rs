use std::ops::RangeInclusive;

use super::{series, ModelError};
use crate::block::BLOCK_BYTES;

/// False positive rates where eight lanes per block are a good fit. Outside
/// this band the fixed hash count costs noticeable space relative to a
/// standard Bloom filter.
pub const EFFICIENT_FPP_RANGE: RangeInclusive<f64> = 0.004..=0.19;

const LOAD_LO: f64 = 1e-3;
const LOAD_HI: f64 = 1e3;
const LOAD_TOL: f64 = 1e-9;

/// A filter size chosen for a number of distinct values and a target rate.
#[derive(Clone, Debug, PartialEq)]
pub struct SizingResult {
    pub num_buckets: u64,
    pub bytes: u64,
    /// `sbbf_fpp(a)` for the chosen size.
    pub predicted_fpp: f64,
    /// Average distinct values per block, `ndv / num_buckets`.
    pub a: f64,
    pub ndv: u64,
    pub target_fpp: f64,
}

impl SizingResult {
    pub fn in_efficient_range(&self) -> bool {
        EFFICIENT_FPP_RANGE.contains(&self.target_fpp)
    }

    /// A human-readable note when the target falls outside
    /// [`EFFICIENT_FPP_RANGE`].
    pub fn warning(&self) -> Option<String> {
        (!self.in_efficient_range()).then(|| {
            format!(
                "target false positive rate {} is outside [{}, {}]; \
                 a split block filter is not space-efficient there",
                self.target_fpp,
                EFFICIENT_FPP_RANGE.start(),
                EFFICIENT_FPP_RANGE.end()
            )
        })
    }
}

/// Largest load `a` in `[1e-3, 1e3]` with `sbbf_fpp(a) <= target`, to within
/// `1e-9`. The returned value always satisfies the target.
pub(crate) fn solve_load(target: f64) -> Result<f64, ModelError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(ModelError::domain("target_fpp", target, "must lie in (0, 1)"));
    }
    if series(LOAD_LO) > target {
        return Err(ModelError::domain(
            "target_fpp",
            target,
            "below the rate of the sparsest supported load",
        ));
    }
    if series(LOAD_HI) <= target {
        return Ok(LOAD_HI);
    }
    let (mut lo, mut hi) = (LOAD_LO, LOAD_HI);
    while hi - lo > LOAD_TOL {
        let mid = 0.5 * (lo + hi);
        if series(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Smallest bucket count for which `ndv` distinct values stay at or below
/// `target_fpp`.
///
/// ```
/// let sized = sbbf::size_for(100_000, 0.01).unwrap();
/// assert!(sized.predicted_fpp <= 0.01);
/// assert!((120_000..140_000).contains(&sized.bytes));
/// ```
pub fn size_for(ndv: u64, target_fpp: f64) -> Result<SizingResult, ModelError> {
    if ndv == 0 {
        return Err(ModelError::domain("ndv", 0.0, "must be at least 1"));
    }
    let load = solve_load(target_fpp)?;
    let fpp_at = |buckets: u64| series(ndv as f64 / buckets as f64);

    let mut buckets = ((ndv as f64 / load).ceil() as u64).max(1);
    while fpp_at(buckets) > target_fpp {
        buckets += 1;
    }
    while buckets > 1 && fpp_at(buckets - 1) <= target_fpp {
        buckets -= 1;
    }

    let a = ndv as f64 / buckets as f64;
    Ok(SizingResult {
        num_buckets: buckets,
        bytes: buckets * BLOCK_BYTES as u64,
        predicted_fpp: series(a),
        a,
        ndv,
        target_fpp,
    })
}
