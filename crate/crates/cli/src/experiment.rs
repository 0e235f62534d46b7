//! Empirical false positive measurement and throughput benchmarks.
//!
//! Keys are derived from counters so inserted and absent keys can never
//! coincide: inserted keys come from `[0, ndv)` and negative queries from
//! `[2^32, 2^32 + queries)`. The hash function supplies the randomness.

use std::thread;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use sbbf::hash::{hash_key, hash_u64};
use sbbf::{sbbf_fpp, size_for, FppModel, Kernel, SplitBlockFilter, BLOCK_BYTES};
use serde::Serialize;

use crate::error::CliError;
use crate::report::{BenchReport, Op};

/// First counter of the negative-query key range.
pub const NEGATIVE_KEY_BASE: u64 = 1 << 32;

/// Largest filter and key count accepted without `--huge`.
pub const DESK_MAX_NDV: u64 = 20_000_000;
pub const DESK_MAX_BYTES: u64 = 64 << 20;

/// The 100M-element configuration, used when `--huge` is given without an
/// explicit size.
pub const HUGE_NDV: u64 = 100_000_000;
pub const HUGE_BYTES: u64 = 1 << 27;

const CHUNK: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KeyMode {
    /// Counter encoded as an 8-byte little-endian integer.
    #[value(name = "random64")]
    Random64,
    /// Counter rendered as the text `key-<n>`.
    #[value(name = "bytes")]
    Bytes,
}

impl KeyMode {
    pub fn hash(self, counter: u64, seed: u64) -> u64 {
        match self {
            KeyMode::Random64 => hash_u64(counter, seed),
            KeyMode::Bytes => hash_key(format!("key-{counter}").as_bytes(), seed),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterSize {
    Bytes(u64),
    TargetFpp(f64),
}

/// Parameters of an fpp-sim or bench run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub ndv: u64,
    pub size: FilterSize,
    pub negative_queries: u64,
    pub seed: u64,
    pub key_mode: KeyMode,
    pub threads: usize,
    pub huge: bool,
}

impl ExperimentSpec {
    pub fn new(ndv: u64, size: FilterSize) -> Self {
        Self {
            ndv,
            size,
            negative_queries: 1_000_000,
            seed: 0,
            key_mode: KeyMode::Random64,
            threads: 1,
            huge: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.ndv > NEGATIVE_KEY_BASE {
            return Err(CliError::usage(format!(
                "--ndv {} exceeds 2^32, the start of the negative key range",
                self.ndv
            )));
        }
        if self.negative_queries > u64::MAX - NEGATIVE_KEY_BASE {
            return Err(CliError::usage("--queries is too large"));
        }
        if self.threads == 0 {
            return Err(CliError::usage("SBBF_THREADS must be at least 1"));
        }
        match self.size {
            FilterSize::Bytes(0) => return Err(CliError::usage("--bytes must be positive")),
            FilterSize::TargetFpp(f) if !(f > 0.0 && f < 1.0) => {
                return Err(CliError::usage(format!("--fpp {f} must lie in (0, 1)")))
            }
            _ => {}
        }
        if !self.huge {
            if self.ndv > DESK_MAX_NDV {
                return Err(CliError::usage(format!(
                    "--ndv {} is above {DESK_MAX_NDV}; pass --huge to allow it",
                    self.ndv
                )));
            }
            if let FilterSize::Bytes(b) = self.size {
                if b > DESK_MAX_BYTES {
                    return Err(CliError::usage(format!(
                        "--bytes {b} is above {DESK_MAX_BYTES}; pass --huge to allow it"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_buckets(&self) -> Result<u64, CliError> {
        match self.size {
            FilterSize::Bytes(b) => Ok(b.div_ceil(BLOCK_BYTES as u64)),
            FilterSize::TargetFpp(f) => Ok(size_for(self.ndv.max(1), f)?.num_buckets),
        }
    }

    pub fn model_fpp(&self) -> Result<f64, CliError> {
        Ok(FppModel::from_buckets(self.ndv, self.num_buckets()?)?.fpp())
    }

    fn allocate(&self) -> Result<SplitBlockFilter, CliError> {
        let buckets = usize::try_from(self.num_buckets()?)
            .map_err(|_| CliError::usage("filter too large for this platform"))?;
        if !self.huge && buckets as u64 * BLOCK_BYTES as u64 > DESK_MAX_BYTES {
            return Err(CliError::usage(
                "sized filter exceeds the desk-scale limit; pass --huge to allow it",
            ));
        }
        Ok(SplitBlockFilter::new(buckets)?)
    }

    fn inserted_hashes(&self, range: std::ops::Range<u64>) -> Vec<u64> {
        range.map(|c| self.key_mode.hash(c, self.seed)).collect()
    }

    fn negative_hashes(&self, count: u64) -> Vec<u64> {
        (NEGATIVE_KEY_BASE..NEGATIVE_KEY_BASE + count)
            .map(|c| self.key_mode.hash(c, self.seed))
            .collect()
    }
}

fn million_per_sec(ops: u64, elapsed: Duration) -> f64 {
    let secs = elapsed.as_secs_f64();
    if secs > 0.0 {
        ops as f64 / secs / 1e6
    } else {
        f64::INFINITY
    }
}

struct LookupRun {
    found: u64,
    wall: Duration,
    per_thread_mops: f64,
}

/// Counts hits of `hashes`, sharded over `threads` readers of a shared
/// filter. No writer is active while they run.
fn parallel_lookup(filter: &SplitBlockFilter, hashes: &[u64], threads: usize) -> LookupRun {
    let kernel = Kernel::detect();
    if threads <= 1 || hashes.len() < threads {
        let start = Instant::now();
        let found = filter.count_found(kernel, hashes) as u64;
        let wall = start.elapsed();
        return LookupRun {
            found,
            wall,
            per_thread_mops: million_per_sec(hashes.len() as u64, wall),
        };
    }
    let chunk = hashes.len().div_ceil(threads);
    let start = Instant::now();
    let results: Vec<(u64, f64)> = thread::scope(|s| {
        let handles: Vec<_> = hashes
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let t = Instant::now();
                    let found = filter.count_found(kernel, part) as u64;
                    (found, million_per_sec(part.len() as u64, t.elapsed()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("lookup thread panicked"))
            .collect()
    });
    let wall = start.elapsed();
    LookupRun {
        found: results.iter().map(|r| r.0).sum(),
        wall,
        per_thread_mops: results.iter().map(|r| r.1).sum::<f64>() / results.len() as f64,
    }
}

struct Common {
    ndv: u64,
    filter_bytes: u64,
    negative_queries: u64,
    false_positives: u64,
    model_fpp: f64,
    kernel: &'static str,
}

impl Common {
    fn report(&self, op: Op, ops: u64, elapsed: Duration, per_thread: f64, threads: usize) -> BenchReport {
        let measured = if self.negative_queries == 0 {
            0.0
        } else {
            self.false_positives as f64 / self.negative_queries as f64
        };
        BenchReport {
            op,
            million_ops_per_sec: million_per_sec(ops, elapsed),
            per_thread_million_ops_per_sec: per_thread,
            threads,
            ops,
            ndv: self.ndv,
            filter_bytes: self.filter_bytes,
            negative_queries: self.negative_queries,
            false_positives: self.false_positives,
            measured_fpp: measured,
            model_fpp: self.model_fpp,
            fpp_ratio: (self.model_fpp > 0.0).then(|| measured / self.model_fpp),
            wall_time_secs: elapsed.as_secs_f64(),
            kernel: self.kernel.to_owned(),
        }
    }
}

/// Builds a filter, inserts `ndv` keys, queries `negative_queries` absent
/// keys and reports insert and lookup rows with measured and model rates.
/// Timings cover filter operations only, not key hashing.
pub fn fpp_sim(spec: &ExperimentSpec) -> Result<Vec<BenchReport>, CliError> {
    spec.validate()?;
    let mut filter = spec.allocate()?;
    let kernel = Kernel::detect();

    let mut insert_time = Duration::ZERO;
    let mut start = 0;
    while start < spec.ndv {
        let end = (start + CHUNK).min(spec.ndv);
        let hashes = spec.inserted_hashes(start..end);
        let t = Instant::now();
        filter.bulk_add_with(kernel, &hashes);
        insert_time += t.elapsed();
        start = end;
    }

    let negatives = spec.negative_hashes(spec.negative_queries);
    let lookup = parallel_lookup(&filter, &negatives, spec.threads);

    let common = Common {
        ndv: spec.ndv,
        filter_bytes: filter.size_bytes() as u64,
        negative_queries: spec.negative_queries,
        false_positives: lookup.found,
        model_fpp: sbbf_fpp(spec.ndv as f64 / filter.num_buckets() as f64)?,
        kernel: kernel.name(),
    };
    Ok(vec![
        common.report(Op::Insert, spec.ndv, insert_time, million_per_sec(spec.ndv, insert_time), 1),
        common.report(
            Op::Lookup,
            spec.negative_queries,
            lookup.wall,
            lookup.per_thread_mops,
            spec.threads,
        ),
    ])
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort_unstable();
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2
    }
}

/// Times `bulk_add` of `ndv` pre-hashed keys and lookups of `ndv` absent
/// pre-hashed keys, `reps` times each, reporting the median.
pub fn bench(spec: &ExperimentSpec, reps: usize) -> Result<Vec<BenchReport>, CliError> {
    if reps < 3 {
        return Err(CliError::usage(format!("--reps {reps} must be at least 3")));
    }
    spec.validate()?;
    let mut filter = spec.allocate()?;
    let kernel = Kernel::detect();
    let inserted = spec.inserted_hashes(0..spec.ndv);
    let negatives = spec.negative_hashes(spec.ndv);

    let mut insert_times = Vec::with_capacity(reps);
    let mut lookup_times = Vec::with_capacity(reps);
    let mut per_thread = Vec::with_capacity(reps);
    let mut found = 0;
    for _ in 0..reps {
        filter.clear();
        let t = Instant::now();
        filter.bulk_add_with(kernel, &inserted);
        insert_times.push(t.elapsed());
        let run = parallel_lookup(&filter, &negatives, spec.threads);
        lookup_times.push(run.wall);
        per_thread.push(run.per_thread_mops);
        found = run.found;
    }
    per_thread.sort_by(f64::total_cmp);

    let common = Common {
        ndv: spec.ndv,
        filter_bytes: filter.size_bytes() as u64,
        negative_queries: spec.ndv,
        false_positives: found,
        model_fpp: sbbf_fpp(spec.ndv as f64 / filter.num_buckets() as f64)?,
        kernel: kernel.name(),
    };
    let insert = median(insert_times);
    Ok(vec![
        common.report(Op::Insert, spec.ndv, insert, million_per_sec(spec.ndv, insert), 1),
        common.report(
            Op::Lookup,
            spec.ndv,
            median(lookup_times),
            per_thread[per_thread.len() / 2],
            spec.threads,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_filter_has_no_false_positives() {
        let spec = ExperimentSpec {
            negative_queries: 10_000,
            ..ExperimentSpec::new(0, FilterSize::Bytes(4096))
        };
        let rows = fpp_sim(&spec).unwrap();
        assert_eq!(rows[1].measured_fpp, 0.0);
        assert_eq!(rows[1].model_fpp, 0.0);
        assert_eq!(rows[1].fpp_ratio, None);
    }

    #[test]
    fn seed_reproducible() {
        let spec = ExperimentSpec {
            negative_queries: 50_000,
            seed: 17,
            ..ExperimentSpec::new(5_000, FilterSize::Bytes(8192))
        };
        let a = fpp_sim(&spec).unwrap();
        let b = fpp_sim(&spec).unwrap();
        assert_eq!(a[1].false_positives, b[1].false_positives);
        assert_eq!(a[1].measured_fpp, b[1].measured_fpp);
    }

    #[test]
    fn threads_do_not_change_counts() {
        let base = ExperimentSpec {
            negative_queries: 40_000,
            key_mode: KeyMode::Bytes,
            ..ExperimentSpec::new(5_000, FilterSize::TargetFpp(0.02))
        };
        let one = fpp_sim(&base).unwrap();
        let four = fpp_sim(&ExperimentSpec { threads: 4, ..base }).unwrap();
        assert_eq!(one[1].false_positives, four[1].false_positives);
        assert_eq!(four[1].threads, 4);
    }

    #[test]
    fn validation_names_the_field() {
        let bad = ExperimentSpec::new(10, FilterSize::TargetFpp(1.5));
        assert!(bad.validate().unwrap_err().to_string().contains("--fpp"));
        let bad = ExperimentSpec::new(10, FilterSize::Bytes(0));
        assert!(bad.validate().unwrap_err().to_string().contains("--bytes"));
        let bad = ExperimentSpec::new(HUGE_NDV, FilterSize::Bytes(HUGE_BYTES));
        assert!(bad.validate().unwrap_err().to_string().contains("--huge"));
        let ok = ExperimentSpec {
            huge: true,
            ..ExperimentSpec::new(HUGE_NDV, FilterSize::Bytes(HUGE_BYTES))
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn bench_needs_three_reps() {
        let spec = ExperimentSpec::new(1000, FilterSize::Bytes(4096));
        assert!(bench(&spec, 2).is_err());
        let rows = bench(&spec, 3).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.million_ops_per_sec > 0.0));
    }

    #[test]
    fn median_of_even_and_odd() {
        let ms = Duration::from_millis;
        assert_eq!(median(vec![ms(3), ms(1), ms(2)]), ms(2));
        assert_eq!(median(vec![ms(4), ms(1), ms(2), ms(3)]), Duration::from_micros(2500));
    }
}
