//! Run manifests: what was computed, from which config, into which files.
//!
//! Every run writes a `manifest.json` next to its data files. The manifest
//! echoes the full config, lists every artifact with a SHA-256 checksum,
//! and records a status per sweep point so a failure at one point is
//! visible without disturbing the others. Timing fields are the only part
//! of a rerun that may differ; all data files are byte-reproducible.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped when the artifact layout changes shape.
pub const ARTIFACT_VERSION: &str = "1";

/// Serializes one floating-point value with 17 significant digits, enough
/// to round-trip f64 exactly.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats an optional value, empty when absent or non-finite.
pub fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => fmt(v),
        _ => String::new(),
    }
}

/// Top-level record of one run.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub study: String,
    /// Verbatim echo of the input config.
    pub config: serde_json::Value,
    /// The shared parameter axis, when the study sweeps one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    pub points: Vec<PointReport>,
    pub files: Vec<FileRecord>,
    /// Wall-clock seconds for the whole run (timing; not reproducible).
    pub seconds_total: f64,
}

/// Named sweep axis with its values in ascending order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Outcome of one unit of work (one sweep point, one seed, one flow).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointReport {
    /// Axis value, when the study has an axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Human-readable point label.
    pub label: String,
    /// `completed` or a failure kind such as `spinodal` or `mass_pole`.
    pub status: String,
    /// Whether the config declared this point expected to fail.
    pub expected_failure: bool,
    /// Wall-clock seconds for this point (timing; not reproducible).
    pub seconds: f64,
}

impl PointReport {
    pub fn ok(&self) -> bool {
        self.status == "completed" || self.expected_failure
    }
}

/// One artifact written by the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
    /// `primary` for the study's main table, `detail` otherwise.
    pub role: String,
}

/// Collects artifacts as they are written and assembles the manifest.
pub struct RunWriter {
    out: PathBuf,
    files: Vec<FileRecord>,
}

impl RunWriter {
    pub fn new(out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out)
            .with_context(|| format!("cannot create output dir {}", out.display()))?;
        Ok(Self { out: out.to_path_buf(), files: Vec::new() })
    }

    /// Writes one artifact and records its checksum.
    pub fn write(&mut self, rel: &str, contents: &str, role: &str) -> Result<()> {
        let path = self.out.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)
            .with_context(|| format!("cannot write {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        self.files.push(FileRecord {
            path: rel.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
            bytes: contents.len() as u64,
            role: role.to_string(),
        });
        Ok(())
    }

    /// Writes `manifest.json` and returns the process exit code:
    /// 0 when every point completed or was expected to fail, 2 otherwise.
    pub fn finish(
        mut self,
        study: &str,
        config: serde_json::Value,
        axis: Option<Axis>,
        points: Vec<PointReport>,
        seconds_total: f64,
    ) -> Result<i32> {
        let all_ok = points.iter().all(PointReport::ok);
        let manifest = RunManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            study: study.to_string(),
            config,
            axis,
            points,
            files: std::mem::take(&mut self.files),
            seconds_total,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        let path = self.out.join("manifest.json");
        std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(if all_ok { 0 } else { 2 })
    }
}

/// Loads a manifest back, for `compare`.
pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("{} is not a run manifest", path.display()))
}

/// Short status string for a solver error.
pub fn status_of_error(err: &nprg::Error) -> String {
    use nprg::Error;
    match err {
        Error::InvalidConfig(_) => "invalid_config",
        Error::Spinodal { .. } => "spinodal",
        Error::MassPole { .. } => "mass_pole",
        Error::FlowIncomplete { .. } => "flow_incomplete",
        Error::DomainTooSmall(_) => "domain_too_small",
        Error::DegenerateMinima { .. } => "degenerate_minima",
        Error::Extraction(_) => "extraction",
        Error::Eigensolver(_) => "eigensolver",
    }
    .to_string()
}

/// Short status string for a flow termination.
pub fn status_of_termination(t: &nprg::grid_flow::Termination) -> String {
    use nprg::grid_flow::Termination;
    match t {
        Termination::Completed => "completed",
        Termination::Spinodal { .. } => "spinodal",
        Termination::MassPole { .. } => "mass_pole",
        Termination::StepUnderflow { .. } => "step_underflow",
        Termination::StepBudget { .. } => "step_budget",
    }
    .to_string()
}
