//! False positive model for split block Bloom filters.
//!
//! With `n` distinct hash values in a filter of `m` bits, the number of
//! values landing in any one block is approximately Poisson with mean
//! `a = 256 n / m`. A block holding `i` values has each lane bit set with
//! probability `1 - (31/32)^i`, and a lookup must hit a set bit in all eight
//! lanes, so
//!
//! ```text
//! fpp(a) = sum_{i >= 0} Poisson_a(i) * (1 - (31/32)^i)^8
//! ```
//!
//! [`sbbf_fpp`] evaluates the series, [`standard_bloom_fpp`] gives the
//! classic Bloom filter rate for comparison, [`size_for`] inverts the model
//! and [`sbbf_fpp_mc`] estimates the same quantity by running the real
//! filter.

mod compare;
mod sim;
mod sizing;

pub use compare::{within_2x_report, Within2xReport, Within2xRow, CLAIMED_RANGE, CLAIMED_RATIO};
pub use sim::{sbbf_fpp_mc, McEstimate};
pub use sizing::{size_for, SizingResult, EFFICIENT_FPP_RANGE};

use thiserror::Error;

use crate::block::{BLOCK_BITS, LANES, LANE_BITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

impl ModelError {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        ModelError::Domain {
            name,
            value,
            reason,
        }
    }
}

/// Upper bound on the per-block load accepted by [`sbbf_fpp`].
pub const MAX_LOAD: f64 = 1e6;

/// Relative truncation error of the series.
const SERIES_REL_TOL: f64 = 1e-12;

/// `ln(31/32)`: log of the chance a lane bit survives one insert.
const LN_LANE_MISS: f64 = -0.031_748_698_314_580_3;

/// The model's parameters: the average number of distinct hash values per
/// block, plus the fixed geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FppModel {
    a: f64,
}

impl FppModel {
    pub const LANES: u32 = LANES as u32;
    pub const LANE_BITS: u32 = LANE_BITS;
    pub const BLOCK_BITS: u32 = BLOCK_BITS;

    pub fn new(a: f64) -> Result<Self, ModelError> {
        check_load(a)?;
        Ok(Self { a })
    }

    /// From `ndv` distinct hash values in a filter of `m_bits` bits.
    pub fn from_bits(ndv: u64, m_bits: u64) -> Result<Self, ModelError> {
        if m_bits == 0 {
            return Err(ModelError::domain("m_bits", 0.0, "must be positive"));
        }
        Self::new(ndv as f64 * f64::from(BLOCK_BITS) / m_bits as f64)
    }

    /// From `ndv` distinct hash values spread over `num_buckets` blocks.
    pub fn from_buckets(ndv: u64, num_buckets: u64) -> Result<Self, ModelError> {
        Self::from_bits(ndv, num_buckets.saturating_mul(u64::from(BLOCK_BITS)))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Bits of filter per distinct value, `m / n = 256 / a`.
    pub fn bits_per_key(&self) -> f64 {
        f64::from(BLOCK_BITS) / self.a
    }

    pub fn fpp(&self) -> f64 {
        series(self.a)
    }
}

fn check_load(a: f64) -> Result<(), ModelError> {
    if !a.is_finite() {
        return Err(ModelError::domain("a", a, "must be finite"));
    }
    if a < 0.0 {
        return Err(ModelError::domain("a", a, "must be nonnegative"));
    }
    if a > MAX_LOAD {
        return Err(ModelError::domain("a", a, "exceeds 1e6 values per block"));
    }
    Ok(())
}

/// False positive probability of a split block Bloom filter holding on
/// average `a` distinct hash values per block.
///
/// ```
/// let eps = sbbf::sbbf_fpp(24.414).unwrap();
/// assert!((eps - 0.0102).abs() < 1e-4);
/// ```
pub fn sbbf_fpp(a: f64) -> Result<f64, ModelError> {
    check_load(a)?;
    Ok(series(a))
}

/// Probability that one block holding `i` values reports a false positive.
#[inline]
pub fn block_fpp(i: u64) -> f64 {
    // 1 - (31/32)^i, accurate for small i.
    let lane_hit = -(i as f64 * LN_LANE_MISS).exp_m1();
    lane_hit.powi(LANES as i32)
}

/// Chernoff bound on `ln P(X >= x)` for `X ~ Poisson(a)`, valid for `x > a`.
fn ln_poisson_upper_tail(a: f64, x: f64) -> f64 {
    -a + x * (1.0 + a.ln() - x.ln())
}

fn series(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let ln_a = a.ln();
    let cap = (a + 40.0 * a.sqrt() + 64.0).ceil() as u64;
    let mut ln_pmf = -a;
    let mut sum = 0.0;
    let mut i = 0u64;
    loop {
        sum += ln_pmf.exp() * block_fpp(i);
        if i >= cap {
            break;
        }
        let next = (i + 1) as f64;
        if next > a && ln_poisson_upper_tail(a, next) < (SERIES_REL_TOL * sum).ln() {
            break;
        }
        ln_pmf += ln_a - next.ln();
        i += 1;
    }
    sum
}

/// How many hash functions a standard Bloom filter uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HashCount {
    Fixed(u32),
    /// The integer `k >= 1` that minimizes the false positive rate.
    OptimalInteger,
}

/// False positive rate `(1 - e^{-k / b})^k` of a standard Bloom filter with
/// `b` bits per key.
pub fn standard_bloom_fpp(bits_per_key: f64, k: HashCount) -> Result<f64, ModelError> {
    check_bits_per_key(bits_per_key)?;
    let k = match k {
        HashCount::Fixed(0) => {
            return Err(ModelError::domain("k", 0.0, "must be at least 1"));
        }
        HashCount::Fixed(k) => k,
        HashCount::OptimalInteger => optimal_hash_count(bits_per_key)?,
    };
    Ok(standard_fixed_k(bits_per_key, k))
}

fn standard_fixed_k(bits_per_key: f64, k: u32) -> f64 {
    let k = f64::from(k);
    (-(-k / bits_per_key).exp_m1()).powf(k)
}

fn check_bits_per_key(bits_per_key: f64) -> Result<(), ModelError> {
    if bits_per_key.is_nan() || bits_per_key <= 0.0 {
        return Err(ModelError::domain("bits_per_key", bits_per_key, "must be positive"));
    }
    Ok(())
}

/// The integer hash count minimizing the standard Bloom false positive rate.
///
/// `k ln(1 - e^{-k/b})` is convex in `k`, so the best integer is one of the
/// two neighbours of the real optimum `b ln 2`.
pub fn optimal_hash_count(bits_per_key: f64) -> Result<u32, ModelError> {
    check_bits_per_key(bits_per_key)?;
    let real = bits_per_key * std::f64::consts::LN_2;
    if !real.is_finite() || real >= f64::from(u32::MAX) {
        return Err(ModelError::domain("bits_per_key", bits_per_key, "too large"));
    }
    let lo = (real.floor() as u32).max(1);
    let hi = (real.ceil() as u32).max(1);
    if standard_fixed_k(bits_per_key, hi) < standard_fixed_k(bits_per_key, lo) {
        Ok(hi)
    } else {
        Ok(lo)
    }
}

/// Closed form with a real-valued optimal `k`: `2^{-b ln 2}`.
pub fn standard_bloom_fpp_real_k(bits_per_key: f64) -> Result<f64, ModelError> {
    check_bits_per_key(bits_per_key)?;
    Ok((-bits_per_key * std::f64::consts::LN_2 * std::f64::consts::LN_2).exp())
}

/// Solves `sbbf_fpp(a) = target` for `a` by bisection on `[lo, hi]`.
pub fn load_for_fpp(target: f64) -> Result<f64, ModelError> {
    sizing::solve_load(target)
}
