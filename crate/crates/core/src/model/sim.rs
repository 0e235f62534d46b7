use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{check_load, ModelError};
use crate::filter::SplitBlockFilter;
use crate::kernel::Kernel;

/// Absent-key queries issued against each freshly built filter, per block.
const QUERIES_PER_BLOCK: u64 = 4;

/// Result of a Monte-Carlo false positive measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub fpp: f64,
    pub false_positives: u64,
    pub trials: u64,
    /// Number of independently populated filters the trials were spread over.
    pub realizations: u64,
    pub inserted: u64,
}

impl McEstimate {
    /// Binomial standard error `sqrt(p (1 - p) / trials)` around `p`.
    pub fn std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Estimates the false positive rate at load `a` by running the filter.
///
/// Each realization draws `N ~ Poisson(a * blocks)` uniform 64-bit hashes
/// and inserts them; since block selection is uniform, each block then holds
/// an independent `Poisson(a)` number of values. It is queried with
/// `4 * blocks` fresh uniform hashes before being cleared and repopulated.
/// Spreading the `trials` queries over many realizations keeps the spread
/// between filter fillings from inflating the estimate's variance beyond the
/// binomial term.
pub fn sbbf_fpp_mc(a: f64, blocks: usize, trials: u64, seed: u64) -> Result<McEstimate, ModelError> {
    check_load(a)?;
    if blocks == 0 {
        return Err(ModelError::domain("blocks", 0.0, "must be at least 1"));
    }
    if trials == 0 {
        return Err(ModelError::domain("trials", 0.0, "must be at least 1"));
    }
    let mut filter = SplitBlockFilter::new(blocks)
        .map_err(|_| ModelError::domain("blocks", blocks as f64, "cannot allocate"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_realization = QUERIES_PER_BLOCK * blocks as u64;
    let total_load = a * blocks as f64;
    let poisson = (total_load > 0.0).then(|| Poisson::new(total_load).expect("positive mean"));
    let kernel = Kernel::detect();

    let mut remaining = trials;
    let mut est = McEstimate {
        fpp: 0.0,
        false_positives: 0,
        trials,
        realizations: 0,
        inserted: 0,
    };
    let mut batch = Vec::new();
    while remaining > 0 {
        filter.clear();
        let n = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
        batch.clear();
        batch.extend((0..n).map(|_| rng.gen::<u64>()));
        filter.bulk_add_with(kernel, &batch);
        est.inserted += n;

        let queries = remaining.min(per_realization);
        batch.clear();
        batch.extend((0..queries).map(|_| rng.gen::<u64>()));
        est.false_positives += filter.count_found(kernel, &batch) as u64;
        est.realizations += 1;
        remaining -= queries;
    }
    est.fpp = est.false_positives as f64 / trials as f64;
    Ok(est)
}
