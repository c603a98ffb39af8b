//! Study runners: one module per experiment kind.
//!
//! Each runner takes its typed config, the raw config echo, and an output
//! directory; it computes in parallel where points are independent, writes
//! data files in deterministic order, and finishes with a manifest. The
//! returned integer is the process exit code.

pub mod compare;
pub mod diagram;
pub mod fixed_points;
pub mod flow;
pub mod poles;
pub mod susy;
pub mod sweep;
pub mod two_particle;

use std::time::Instant;

/// Runs `f` and reports its wall-clock seconds alongside the result.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Sorts an axis ascending and drops duplicates, so fan-out and merge
/// order never depend on how the config listed the values.
pub fn sorted_axis(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("axis values must not be NaN"));
    v.dedup();
    v
}

/// Whether `value` appears in the expected-failure list (exact match on
/// the serialized form, so the config names the point unambiguously).
pub fn expected(value: f64, expected_failures: &[f64]) -> bool {
    expected_failures.iter().any(|&e| e == value)
}
