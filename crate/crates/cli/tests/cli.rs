use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sbbf::hash::hash_key;
use sbbf::{HasherId, SplitBlockFilter};
use sbbf_cli::{bench, ExperimentSpec, FilterSize};

fn sbbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbbf"))
        .args(args)
        .env_remove("SBBF_THREADS")
        .output()
        .expect("spawn sbbf")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_keys(path: &Path, range: std::ops::Range<u64>) {
    let body: String = range.map(|i| format!("user-{i}\n")).collect();
    fs::write(path, body).unwrap();
}

#[test]
fn build_then_query_finds_every_key() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.txt");
    let filter = dir.path().join("f.sbbf");
    write_keys(&keys, 0..5000);

    let out = sbbf(&["build", keys.to_str().unwrap(), filter.to_str().unwrap(), "--fpp", "0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = sbbf(&["query", filter.to_str().unwrap(), keys.to_str().unwrap()]);
    assert!(out.status.success());
    let lines: Vec<String> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 5000);
    assert!(lines.iter().all(|l| l == "maybe"));
}

#[test]
fn disjoint_keys_mostly_absent() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.txt");
    let others = dir.path().join("others.txt");
    let filter = dir.path().join("f.sbbf");
    write_keys(&keys, 0..100_000);
    write_keys(&others, 1_000_000..1_100_000);

    assert!(sbbf(&["build", keys.to_str().unwrap(), filter.to_str().unwrap()]).status.success());
    let out = sbbf(&["query", filter.to_str().unwrap(), others.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let maybe = text.lines().filter(|l| *l == "maybe").count();
    let absent = text.lines().filter(|l| *l == "absent").count();
    assert_eq!(maybe + absent, 100_000);
    let frac = maybe as f64 / 100_000.0;
    assert!((frac - 0.01).abs() <= 0.005, "maybe fraction {frac}");
}

#[test]
fn final_line_without_newline_is_a_key() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.txt");
    let filter = dir.path().join("f.sbbf");
    fs::write(&keys, "alpha\nbeta").unwrap();
    assert!(sbbf(&["build", keys.to_str().unwrap(), filter.to_str().unwrap()]).status.success());

    let image = fs::read(&filter).unwrap();
    let f = SplitBlockFilter::from_bytes(&image).unwrap();
    assert_eq!(f.hasher_id(), HasherId::XXH3);
    assert!(f.find_hash(hash_key(b"beta", 0)));
    assert!(f.find_hash(hash_key(b"alpha", 0)));
}

#[test]
fn corrupted_filter_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.txt");
    let filter = dir.path().join("f.sbbf");
    write_keys(&keys, 0..100);
    assert!(sbbf(&["build", keys.to_str().unwrap(), filter.to_str().unwrap()]).status.success());

    let mut image = fs::read(&filter).unwrap();
    image[20] ^= 0xFF;
    fs::write(&filter, &image).unwrap();
    let out = sbbf(&["query", filter.to_str().unwrap(), keys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn raw_hash_filter_is_a_hasher_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.txt");
    let filter = dir.path().join("raw.sbbf");
    write_keys(&keys, 0..10);
    fs::write(&filter, SplitBlockFilter::new(4).unwrap().to_bytes()).unwrap();
    let out = sbbf(&["query", filter.to_str().unwrap(), keys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hasher"));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = sbbf(&["query", "/nonexistent/f.sbbf", "/nonexistent/k.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(sbbf(&["fpp-sim", "--ndv", "10"]).status.code(), Some(1));
    assert_eq!(sbbf(&["fpp-sim", "--ndv", "10", "--bytes", "64", "--fpp", "0.1"]).status.code(), Some(1));
    assert_eq!(sbbf(&["size", "--ndv", "10", "--fpp", "1.5"]).status.code(), Some(1));
    assert_eq!(sbbf(&["model", "--a-min", "5", "--a-max", "1"]).status.code(), Some(1));
    assert_eq!(sbbf(&["bench", "--ndv", "10", "--bytes", "64", "--reps", "2"]).status.code(), Some(1));
    assert_eq!(sbbf(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sbbf(&["fpp-sim", "--ndv", "100000000", "--bytes", "134217728"]).status.code(), Some(1));
    assert_eq!(sbbf(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_sbbf"))
        .args(["fpp-sim", "--ndv", "10", "--bytes", "64"])
        .env("SBBF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn assert_2x_fails_outside_claimed_range() {
    assert_eq!(sbbf(&["model", "--assert-2x"]).status.code(), Some(0));
    let out = sbbf(&["model", "--a-min", "1", "--a-max", "52", "--steps", "52", "--assert-2x"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn model_single_zero_row() {
    let out = sbbf(&["model", "--a-min", "0", "--a-max", "0", "--json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["sbbf_fpp"], 0.0);
}

#[test]
fn size_command() {
    let out = sbbf(&["size", "--ndv", "100000", "--fpp", "0.01", "--json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bytes = rows[0]["bytes"].as_f64().unwrap();
    assert!((bytes - 131_072.0).abs() / 131_072.0 <= 0.10, "{bytes}");

    let out = sbbf(&["size", "--ndv", "100000", "--fpp", "0.001"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    let out = sbbf(&["size", "--ndv", "1", "--fpp", "0.99", "--json"]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[0]["num_buckets"], 1);
}

const REPORT_FIELDS: [&str; 14] = [
    "op",
    "million_ops_per_sec",
    "per_thread_million_ops_per_sec",
    "threads",
    "ops",
    "ndv",
    "filter_bytes",
    "negative_queries",
    "false_positives",
    "measured_fpp",
    "model_fpp",
    "fpp_ratio",
    "wall_time_secs",
    "kernel",
];

#[test]
fn csv_and_json_carry_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sim.csv");
    let out = sbbf(&[
        "fpp-sim", "--ndv", "20000", "--bytes", "32768", "--queries", "100000", "--json", "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        for field in REPORT_FIELDS {
            assert!(row.get(field).is_some(), "json missing {field}");
        }
    }

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers: Vec<String> = reader.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(headers, REPORT_FIELDS);
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 2);
    assert_eq!(&records[0][0], "insert");
    assert_eq!(&records[1][0], "lookup");
    let measured: f64 = records[1][9].parse().unwrap();
    assert!(measured > 0.0 && measured < 1.0);
}

#[test]
fn parallel_lookups_report_threads() {
    let out = Command::new(env!("CARGO_BIN_EXE_sbbf"))
        .args(["bench", "--ndv", "50000", "--bytes", "65536", "--reps", "3", "--json"])
        .env("SBBF_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[1]["threads"], 3);
    assert!(rows[1]["per_thread_million_ops_per_sec"].as_f64().unwrap() > 0.0);
}

#[test]
fn lookup_rate_independent_of_scale() {
    // Same bits per key at two sizes. Constant-work lookups should not slow
    // down by an order of magnitude; cache misses account for the rest.
    let small = bench(&ExperimentSpec::new(100_000, FilterSize::Bytes(131_072)), 3).unwrap();
    let large = bench(&ExperimentSpec::new(1_000_000, FilterSize::Bytes(1_310_720)), 3).unwrap();
    let (a, b) = (small[1].million_ops_per_sec, large[1].million_ops_per_sec);
    assert!(a / b < 10.0 && b / a < 10.0, "{a} vs {b}");
}
