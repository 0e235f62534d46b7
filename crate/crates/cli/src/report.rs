use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Insert,
    Lookup,
}

/// Throughput and accuracy of one operation type on one filter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub op: Op,
    /// Aggregate rate over all threads.
    pub million_ops_per_sec: f64,
    pub per_thread_million_ops_per_sec: f64,
    pub threads: usize,
    pub ops: u64,
    pub ndv: u64,
    pub filter_bytes: u64,
    pub negative_queries: u64,
    pub false_positives: u64,
    /// `false_positives / negative_queries`.
    pub measured_fpp: f64,
    pub model_fpp: f64,
    /// `measured_fpp / model_fpp`, absent when the model predicts zero.
    pub fpp_ratio: Option<f64>,
    pub wall_time_secs: f64,
    pub kernel: String,
}

pub fn render_bench(rows: &[BenchReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<7} {:>12} {:>12} {:>8} {:>12} {:>12} {:>10} {:>10} {:>7} {:>10}",
        "op", "ndv", "bytes", "threads", "Mops/s", "Mops/s/thr", "measured", "model", "ratio", "wall(s)"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<7} {:>12} {:>12} {:>8} {:>12.2} {:>12.2} {:>10.6} {:>10.6} {:>7} {:>10.4}",
            match r.op {
                Op::Insert => "insert",
                Op::Lookup => "lookup",
            },
            r.ndv,
            r.filter_bytes,
            r.threads,
            r.million_ops_per_sec,
            r.per_thread_million_ops_per_sec,
            r.measured_fpp,
            r.model_fpp,
            r.fpp_ratio.map_or_else(|| "-".to_owned(), |x| format!("{x:.3}")),
            r.wall_time_secs,
        );
    }
    out
}
