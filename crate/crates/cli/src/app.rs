use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sbbf::hash::{hash_key, DEFAULT_KEY_SEED};
use sbbf::model::{Within2xRow, CLAIMED_RATIO};
use sbbf::{size_for, within_2x_report, HasherId, SplitBlockFilter};
use serde::Serialize;

use crate::error::CliError;
use crate::experiment::{self, ExperimentSpec, FilterSize, KeyMode, HUGE_BYTES, HUGE_NDV};
use crate::keys::{read_file, split_keys};
use crate::report::render_bench;

/// Tolerance on the within-2x check applied by `model --assert-2x`.
pub const ASSERT_2X_LIMIT: f64 = CLAIMED_RATIO * 1.05;

/// Environment variable selecting the number of lookup threads.
pub const THREADS_ENV: &str = "SBBF_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sbbf", version, about = "Split block Bloom filter toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure the false positive rate of a filter and compare with the model.
    FppSim(FppSimArgs),
    /// Tabulate the model against a standard Bloom filter of equal size.
    Model(ModelArgs),
    /// Choose a filter size for a key count and target false positive rate.
    Size(SizeArgs),
    /// Benchmark insert and lookup throughput.
    Bench(BenchArgs),
    /// Build a filter file from a newline-delimited key file.
    Build(BuildArgs),
    /// Query a filter file with a key file, printing `maybe` or `absent` per key.
    Query(QueryArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Print rows as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Also write rows as CSV to this path.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SizingArgs {
    /// Number of distinct keys to insert.
    #[arg(long)]
    pub ndv: Option<u64>,
    /// Filter size in bytes (rounded up to 32-byte blocks).
    #[arg(long, conflicts_with = "fpp")]
    pub bytes: Option<u64>,
    /// Size the filter for this target false positive rate instead.
    #[arg(long)]
    pub fpp: Option<f64>,
    /// Allow very large runs; defaults to 100M keys in 128 MiB.
    #[arg(long)]
    pub huge: bool,
}

#[derive(Debug, Args)]
pub struct FppSimArgs {
    #[command(flatten)]
    pub sizing: SizingArgs,
    /// Number of absent keys to query.
    #[arg(long, default_value_t = 1_000_000)]
    pub queries: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = KeyMode::Random64)]
    pub key_mode: KeyMode,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub sizing: SizingArgs,
    /// Repetitions; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 20.0)]
    pub a_min: f64,
    #[arg(long, default_value_t = 52.0)]
    pub a_max: f64,
    /// Grid points from a-min to a-max inclusive.
    #[arg(long, default_value_t = 65)]
    pub steps: usize,
    /// Exit with status 3 unless every ratio on the grid is at most 2.1.
    #[arg(long = "assert-2x")]
    pub assert_2x: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[arg(long)]
    pub ndv: u64,
    #[arg(long)]
    pub fpp: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Newline-delimited key file.
    pub keys: PathBuf,
    /// Filter file to write.
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub fpp: f64,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Filter file written by `build`.
    pub filter: PathBuf,
    /// Newline-delimited key file.
    pub keys: PathBuf,
}

/// Runs a parsed command, writing results to `out` and warnings to stderr.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::FppSim(args) => fpp_sim(args, out),
        Command::Model(args) => model(args, out),
        Command::Size(args) => size(args, out),
        Command::Bench(args) => bench(args, out),
        Command::Build(args) => build(args, out),
        Command::Query(args) => query(args, out),
    }
}

fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::usage(format!(
                "{THREADS_ENV}={v:?} is not a positive integer"
            ))),
        },
    }
}

fn experiment_spec(sizing: &SizingArgs, seed: u64) -> Result<ExperimentSpec, CliError> {
    let ndv = match (sizing.ndv, sizing.huge) {
        (Some(n), _) => n,
        (None, true) => HUGE_NDV,
        (None, false) => return Err(CliError::usage("--ndv is required")),
    };
    let size = match (sizing.bytes, sizing.fpp, sizing.huge) {
        (Some(b), None, _) => FilterSize::Bytes(b),
        (None, Some(f), _) => FilterSize::TargetFpp(f),
        (None, None, true) => FilterSize::Bytes(HUGE_BYTES),
        (None, None, false) => {
            return Err(CliError::usage("exactly one of --bytes or --fpp is required"))
        }
        (Some(_), Some(_), _) => {
            return Err(CliError::usage("--bytes and --fpp are mutually exclusive"))
        }
    };
    Ok(ExperimentSpec {
        seed,
        threads: threads_from_env()?,
        huge: sizing.huge,
        ..ExperimentSpec::new(ndv, size)
    })
}

fn emit<T: Serialize>(
    output: &OutputArgs,
    rows: &[T],
    table: impl FnOnce(&[T]) -> String,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if output.json {
        serde_json::to_writer_pretty(&mut *out, rows)?;
        writeln!(out)?;
    } else {
        out.write_all(table(rows).as_bytes())?;
    }
    if let Some(path) = &output.csv {
        let mut writer = csv::Writer::from_path(path)?;
        for row in rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

fn fpp_sim(args: FppSimArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = ExperimentSpec {
        negative_queries: args.queries,
        key_mode: args.key_mode,
        ..experiment_spec(&args.sizing, args.seed)?
    };
    let rows = experiment::fpp_sim(&spec)?;
    emit(&args.output, &rows, render_bench, out)
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = experiment_spec(&args.sizing, args.seed)?;
    let rows = experiment::bench(&spec, args.reps)?;
    emit(&args.output, &rows, render_bench, out)
}

/// One row of the `model` table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelRow {
    pub a: f64,
    pub bits_per_key: Option<f64>,
    pub sbbf_fpp: f64,
    pub standard_fpp: f64,
    pub standard_k: Option<u32>,
    pub standard_fpp_real_k: f64,
    pub ratio: Option<f64>,
}

impl From<&Within2xRow> for ModelRow {
    fn from(r: &Within2xRow) -> Self {
        ModelRow {
            a: r.a,
            bits_per_key: r.bits_per_key.is_finite().then_some(r.bits_per_key),
            sbbf_fpp: r.sbbf_fpp,
            standard_fpp: r.standard_fpp,
            standard_k: r.standard_k,
            standard_fpp_real_k: r.standard_fpp_real_k,
            ratio: r.ratio,
        }
    }
}

/// Evenly spaced grid from `a_min` to `a_max` inclusive.
pub fn model_grid(a_min: f64, a_max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(a_min.is_finite() && a_max.is_finite()) || a_min < 0.0 || a_max < a_min {
        return Err(CliError::usage(format!(
            "--a-min {a_min} / --a-max {a_max}: need 0 <= a-min <= a-max"
        )));
    }
    if a_min == a_max {
        return Ok(vec![a_min]);
    }
    if steps < 2 {
        return Err(CliError::usage("--steps must be at least 2 for a range"));
    }
    let step = (a_max - a_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { a_max } else { a_min + step * i as f64 })
        .collect())
}

pub fn model_rows(a_min: f64, a_max: f64, steps: usize) -> Result<Vec<ModelRow>, CliError> {
    let grid = model_grid(a_min, a_max, steps)?;
    let report = within_2x_report(&grid).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(report.rows.iter().map(ModelRow::from).collect())
}

fn render_model(rows: &[ModelRow]) -> String {
    let opt = |x: Option<f64>, prec: usize| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.prec$}"));
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>8} {:>12} {:>12} {:>12} {:>4} {:>12} {:>7}",
        "a", "bits/key", "sbbf_fpp", "std_fpp", "k", "std_real_k", "ratio"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>8.3} {:>12} {:>12.6e} {:>12.6e} {:>4} {:>12.6e} {:>7}",
            r.a,
            opt(r.bits_per_key, 4),
            r.sbbf_fpp,
            r.standard_fpp,
            r.standard_k.map_or_else(|| "-".to_owned(), |k| k.to_string()),
            r.standard_fpp_real_k,
            opt(r.ratio, 4),
        );
    }
    if let Some(max) = rows.iter().filter_map(|r| r.ratio).reduce(f64::max) {
        let _ = writeln!(s, "max ratio: {max:.4}");
    }
    s
}

fn model(args: ModelArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = model_rows(args.a_min, args.a_max, args.steps)?;
    emit(&args.output, &rows, render_model, out)?;
    if args.assert_2x {
        let max = rows.iter().filter_map(|r| r.ratio).reduce(f64::max);
        if let Some(max) = max.filter(|&m| m > ASSERT_2X_LIMIT) {
            return Err(CliError::Check(format!(
                "max ratio {max:.4} exceeds {ASSERT_2X_LIMIT:.2}"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeRow {
    pub ndv: u64,
    pub target_fpp: f64,
    pub num_buckets: u64,
    pub bytes: u64,
    pub a: f64,
    pub predicted_fpp: f64,
    pub in_efficient_range: bool,
}

fn size(args: SizeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sized = size_for(args.ndv, args.fpp)?;
    if let Some(warning) = sized.warning() {
        eprintln!("warning: {warning}");
    }
    let row = SizeRow {
        ndv: sized.ndv,
        target_fpp: sized.target_fpp,
        num_buckets: sized.num_buckets,
        bytes: sized.bytes,
        a: sized.a,
        predicted_fpp: sized.predicted_fpp,
        in_efficient_range: sized.in_efficient_range(),
    };
    emit(
        &args.output,
        &[row],
        |rows| {
            let r = &rows[0];
            format!(
                "ndv            {}\ntarget fpp     {}\nbuckets        {}\nbytes          {}\n\
                 a              {:.4}\npredicted fpp  {:.6}\n",
                r.ndv, r.target_fpp, r.num_buckets, r.bytes, r.a, r.predicted_fpp
            )
        },
        out,
    )
}

fn build(args: BuildArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let data = read_file(&args.keys)?;
    let hashes: Vec<u64> = split_keys(&data)
        .into_iter()
        .map(|k| hash_key(k, DEFAULT_KEY_SEED))
        .collect();
    let distinct = hashes.iter().collect::<HashSet<_>>().len() as u64;
    let sized = size_for(distinct.max(1), args.fpp)?;
    if let Some(warning) = sized.warning() {
        eprintln!("warning: {warning}");
    }
    let buckets = usize::try_from(sized.num_buckets)
        .map_err(|_| CliError::usage("filter too large for this platform"))?;
    let mut filter = SplitBlockFilter::with_hasher(buckets, HasherId::XXH3)?;
    filter.bulk_add(&hashes);
    write_image(&args.out, &filter)?;
    writeln!(
        out,
        "wrote {} ({} keys, {} distinct, {} buckets, {} bytes, predicted fpp {:.6})",
        args.out.display(),
        hashes.len(),
        distinct,
        sized.num_buckets,
        sized.bytes,
        sized.predicted_fpp
    )?;
    Ok(())
}

fn write_image(path: &Path, filter: &SplitBlockFilter) -> Result<(), CliError> {
    fs::write(path, filter.to_bytes()).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn query(args: QueryArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let image = read_file(&args.filter)?;
    let filter = SplitBlockFilter::from_bytes(&image).map_err(|source| CliError::Persist {
        path: args.filter.clone(),
        source,
    })?;
    if filter.hasher_id() != HasherId::XXH3 {
        return Err(CliError::HasherMismatch {
            found: filter.hasher_id(),
            expected: HasherId::XXH3,
        });
    }
    let data = read_file(&args.keys)?;
    let mut buf = std::io::BufWriter::new(out);
    for key in split_keys(&data) {
        let verdict = if filter.find_hash(hash_key(key, DEFAULT_KEY_SEED)) {
            "maybe"
        } else {
            "absent"
        };
        writeln!(buf, "{verdict}")?;
    }
    buf.flush()?;
    Ok(())
}
