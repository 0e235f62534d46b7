use std::ops::RangeInclusive;

use super::{
    check_load, optimal_hash_count, series, standard_bloom_fpp_real_k, standard_fixed_k,
    ModelError,
};
use crate::block::BLOCK_BITS;

/// Loads over which the split block filter's rate stays within
/// [`CLAIMED_RATIO`] of a standard Bloom filter of the same size.
pub const CLAIMED_RANGE: RangeInclusive<f64> = 20.0..=52.0;
pub const CLAIMED_RATIO: f64 = 2.0;

/// One grid point comparing a split block filter to a standard Bloom filter
/// with the same `n` and `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Within2xRow {
    pub a: f64,
    /// `256 / a`; infinite when `a == 0`.
    pub bits_per_key: f64,
    pub sbbf_fpp: f64,
    /// Standard Bloom rate with the best integer hash count.
    pub standard_fpp: f64,
    pub standard_k: Option<u32>,
    /// Standard Bloom rate with the real-valued optimal hash count.
    pub standard_fpp_real_k: f64,
    /// `sbbf_fpp / standard_fpp`; `None` for an empty filter.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Within2xReport {
    pub rows: Vec<Within2xRow>,
}

impl Within2xReport {
    /// Largest defined ratio on the grid.
    pub fn max_ratio(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio).reduce(f64::max)
    }

    /// Largest ratio among rows inside [`CLAIMED_RANGE`].
    pub fn max_ratio_in_claimed_range(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| CLAIMED_RANGE.contains(&r.a))
            .filter_map(|r| r.ratio)
            .reduce(f64::max)
    }
}

fn row(a: f64) -> Result<Within2xRow, ModelError> {
    check_load(a)?;
    if a > 1e3 {
        return Err(ModelError::domain("a", a, "grid values must be at most 1e3"));
    }
    if a == 0.0 {
        return Ok(Within2xRow {
            a,
            bits_per_key: f64::INFINITY,
            sbbf_fpp: 0.0,
            standard_fpp: 0.0,
            standard_k: None,
            standard_fpp_real_k: 0.0,
            ratio: None,
        });
    }
    let bits_per_key = f64::from(BLOCK_BITS) / a;
    let k = optimal_hash_count(bits_per_key)?;
    let sbbf = series(a);
    let standard = standard_fixed_k(bits_per_key, k);
    Ok(Within2xRow {
        a,
        bits_per_key,
        sbbf_fpp: sbbf,
        standard_fpp: standard,
        standard_k: Some(k),
        standard_fpp_real_k: standard_bloom_fpp_real_k(bits_per_key)?,
        ratio: Some(sbbf / standard),
    })
}

/// Compares the split block filter against a standard Bloom filter of equal
/// size at every load in `a_grid`.
///
/// ```
/// let grid: Vec<f64> = (0..=64).map(|i| 20.0 + 0.5 * i as f64).collect();
/// let report = sbbf::within_2x_report(&grid).unwrap();
/// assert!(report.max_ratio().unwrap() < 2.0);
/// ```
pub fn within_2x_report(a_grid: &[f64]) -> Result<Within2xReport, ModelError> {
    let rows = a_grid.iter().map(|&a| row(a)).collect::<Result<_, _>>()?;
    Ok(Within2xReport { rows })
}
