//! End-to-end tests of the `nprg` binary: exit-code contract, config
//! strictness, fault isolation, deterministic artifacts, and `compare`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nprg"))
}

/// Fresh scratch directory per call, unique across parallel tests.
fn scratch(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "nprg-cli-test-{}-{tag}-{n}",
        std::process::id()
    ));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(verb: &str, config: &Path, out: &Path) -> Output {
    bin()
        .args([verb, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary should spawn")
}

/// A one-point sweep that completes in well under a second.
const TINY_SWEEP: &str = r#"{
    "study": "sweep",
    "family": "single_well",
    "values": [0.5],
    "methods": ["couplings", "oracle"],
    "order": 6
}"#;

/// Two-point sweep whose 0.02 point hits the tunneling mass pole.
const POLE_SWEEP: &str = r#"{
    "study": "sweep",
    "family": "double_well",
    "values": [0.3, 0.02],
    "methods": ["couplings"],
    "order": 8
}"#;

fn manifest_without_timing(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["seconds_total"] = 0.into();
    for point in v["points"].as_array_mut().unwrap() {
        point["seconds"] = 0.into();
    }
    v
}

#[test]
fn rerun_is_byte_identical_outside_manifest_timing() {
    let dir = scratch("rerun");
    let cfg = write_config(&dir, "sweep.json", TINY_SWEEP);
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert_eq!(run("sweep", &cfg, &a).status.code(), Some(0));
    assert_eq!(run("sweep", &cfg, &b).status.code(), Some(0));

    let csv_a = std::fs::read(a.join("sweep.csv")).unwrap();
    let csv_b = std::fs::read(b.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "data files must be reproducible byte for byte");
    assert_eq!(manifest_without_timing(&a), manifest_without_timing(&b));
}

#[test]
fn manifest_checksums_match_written_files() {
    use sha2::{Digest, Sha256};
    let dir = scratch("sums");
    let cfg = write_config(&dir, "sweep.json", TINY_SWEEP);
    let out = dir.join("out");
    assert_eq!(run("sweep", &cfg, &out).status.code(), Some(0));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for file in files {
        let body = std::fs::read(out.join(file["path"].as_str().unwrap())).unwrap();
        let digest = format!("{:x}", Sha256::digest(&body));
        assert_eq!(digest, file["sha256"].as_str().unwrap());
        assert_eq!(body.len() as u64, file["bytes"].as_u64().unwrap());
    }
}

#[test]
fn failing_point_is_isolated_and_drives_exit_two() {
    let dir = scratch("isolate");
    let cfg = write_config(&dir, "sweep.json", POLE_SWEEP);
    let out = dir.join("out");
    let output = run("sweep", &cfg, &out);
    assert_eq!(output.status.code(), Some(2), "unexpected failure must exit 2");

    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "header plus both axis points: {csv}");
    assert!(lines[1].starts_with("2.0000000000000000e-2"), "{csv}");
    assert!(lines[1].ends_with("mass_pole"), "failed point keeps its diagnosis: {csv}");
    assert!(lines[2].ends_with("completed"), "healthy point is unaffected: {csv}");
}

#[test]
fn expected_failure_downgrades_exit_to_zero() {
    let dir = scratch("expected");
    let cfg = write_config(
        &dir,
        "sweep.json",
        &POLE_SWEEP.replace("\"order\": 8", "\"order\": 8,\n    \"expected_failures\": [0.02]"),
    );
    let out = dir.join("out");
    assert_eq!(run("sweep", &cfg, &out).status.code(), Some(0));

    let manifest = manifest_without_timing(&out);
    let points = manifest["points"].as_array().unwrap();
    assert_eq!(points[0]["status"], "couplings:mass_pole");
    assert_eq!(points[0]["expected_failure"], true);
    assert_eq!(points[1]["status"], "completed");
}

#[test]
fn verb_and_config_study_must_agree() {
    let dir = scratch("tag");
    let cfg = write_config(&dir, "sweep.json", TINY_SWEEP);
    let output = run("flow", &cfg, &dir.join("out"));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("expects"), "stderr: {stderr}");
}

#[test]
fn unknown_fields_are_rejected_at_every_level() {
    let dir = scratch("strict");
    let cases = [
        // Top-level stray key.
        r#"{"study": "sweep", "family": "single_well", "values": [0.5],
            "methods": ["oracle"], "typo_key": 1}"#,
        // Stray key nested in the flow block.
        r#"{"study": "sweep", "family": "single_well", "values": [0.5],
            "methods": ["oracle"], "flow": {"lambda0": 20.0, "lambda_lr": 0.001}}"#,
        // Stray key nested in the solver block of a flow study.
        r#"{"study": "flow",
            "potential": {"kind": "single_well", "params": {"lambda0": 1.0}},
            "solver": {"kind": "grid", "order_n": 8}}"#,
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = write_config(&dir, &format!("bad{i}.json"), body);
        let verb = if i == 2 { "flow" } else { "sweep" };
        let output = run(verb, &cfg, &dir.join(format!("out{i}")));
        assert_eq!(output.status.code(), Some(1), "case {i} must be refused");
        let stderr = String::from_utf8_lossy(&output.stderr);
        assert!(stderr.contains("unknown field"), "case {i} stderr: {stderr}");
    }
}

#[test]
fn unreadable_config_is_a_config_error() {
    let dir = scratch("missing");
    let output = run("sweep", &dir.join("nope.json"), &dir.join("out"));
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn compare_joins_identical_runs_with_zero_deviation() {
    let dir = scratch("compare");
    let cfg = write_config(&dir, "sweep.json", TINY_SWEEP);
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert_eq!(run("sweep", &cfg, &a).status.code(), Some(0));
    assert_eq!(run("sweep", &cfg, &b).status.code(), Some(0));

    let out = dir.join("cmp");
    let output = bin()
        .arg("compare")
        .arg("--out")
        .arg(&out)
        .arg(a.join("manifest.json"))
        .arg(b.join("manifest.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));

    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let dev_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, name)| name.starts_with("dev.") && !name.ends_with("_status"))
        .map(|(i, _)| i)
        .collect();
    assert!(!dev_cols.is_empty());
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        for &i in &dev_cols {
            assert_eq!(fields[i], "0.0000000000000000e0", "column {} in {line}", header[i]);
        }
    }
}

#[test]
fn compare_rejects_mismatched_axes() {
    let dir = scratch("axes");
    let cfg_a = write_config(&dir, "a.json", TINY_SWEEP);
    let cfg_b = write_config(&dir, "b.json", &TINY_SWEEP.replace("[0.5]", "[0.7]"));
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert_eq!(run("sweep", &cfg_a, &a).status.code(), Some(0));
    assert_eq!(run("sweep", &cfg_b, &b).status.code(), Some(0));

    let output = bin()
        .arg("compare")
        .arg("--out")
        .arg(dir.join("cmp"))
        .arg(a.join("manifest.json"))
        .arg(b.join("manifest.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("axis mismatch"), "stderr: {stderr}");
}
