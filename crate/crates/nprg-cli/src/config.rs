//! Experiment configuration schema.
//!
//! One JSON file per experiment, dispatched on its `study` tag. Every
//! struct rejects unknown keys so a typo fails the run instead of being
//! silently ignored (the tag itself is split off before deserialization
//! because serde's internally tagged enums do not enforce
//! `deny_unknown_fields`).

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use nprg::grid_flow::FlowConfig;
use nprg::potentials::{Interaction, PotentialSpec};

/// A parsed experiment file: the study tag plus its typed body.
#[derive(Debug, Clone)]
pub enum StudyConfig {
    Flow(FlowStudy),
    Sweep(SweepStudy),
    FlowDiagram(FlowDiagramStudy),
    FixedPoints(FixedPointsStudy),
    Susy(SusyStudy),
    TwoParticle(TwoParticleStudy),
    Poles(PolesStudy),
}

impl StudyConfig {
    pub fn study_name(&self) -> &'static str {
        match self {
            StudyConfig::Flow(_) => "flow",
            StudyConfig::Sweep(_) => "sweep",
            StudyConfig::FlowDiagram(_) => "flow_diagram",
            StudyConfig::FixedPoints(_) => "fixed_points",
            StudyConfig::Susy(_) => "susy",
            StudyConfig::TwoParticle(_) => "two_particle",
            StudyConfig::Poles(_) => "poles",
        }
    }
}

/// Loads and validates an experiment file.
pub fn load(path: &Path) -> Result<(StudyConfig, serde_json::Value)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let echo: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let mut body = echo.clone();
    let study = body
        .as_object_mut()
        .and_then(|o| o.remove("study"))
        .and_then(|v| v.as_str().map(str::to_owned))
        .context("config needs a string `study` field")?;
    let cfg = match study.as_str() {
        "flow" => StudyConfig::Flow(typed(body)?),
        "sweep" => StudyConfig::Sweep(typed(body)?),
        "flow_diagram" => StudyConfig::FlowDiagram(typed(body)?),
        "fixed_points" => StudyConfig::FixedPoints(typed(body)?),
        "susy" => StudyConfig::Susy(typed(body)?),
        "two_particle" => StudyConfig::TwoParticle(typed(body)?),
        "poles" => StudyConfig::Poles(typed(body)?),
        other => bail!("unknown study `{other}`"),
    };
    cfg.validate()?;
    Ok((cfg, echo))
}

fn typed<T: serde::de::DeserializeOwned>(body: serde_json::Value) -> Result<T> {
    serde_json::from_value(body).context("config does not match the study schema")
}

/// Which solver evolves the potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverChoice {
    /// `grid` or `couplings`.
    pub kind: String,
    /// Truncation order (couplings only).
    #[serde(default)]
    pub order: Option<usize>,
    /// Expand around the classical minimum instead of the origin
    /// (couplings only).
    #[serde(default)]
    pub shift_to_minimum: bool,
    /// Half-width of the spatial domain (grid only).
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    /// Node count of the spatial domain (grid only).
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_x_max() -> f64 {
    8.0
}

fn default_points() -> usize {
    1601
}

impl Default for SolverChoice {
    fn default() -> Self {
        Self {
            kind: "grid".into(),
            order: None,
            shift_to_minimum: false,
            x_max: default_x_max(),
            points: default_points(),
        }
    }
}

impl SolverChoice {
    pub fn validate(&self) -> Result<()> {
        match self.kind.as_str() {
            "grid" => {
                if self.order.is_some() {
                    bail!("solver kind `grid` takes no truncation order");
                }
                if self.shift_to_minimum {
                    bail!("shift_to_minimum only applies to the couplings solver");
                }
            }
            "couplings" => match self.order {
                Some(n) if n >= 2 => {}
                _ => bail!("solver kind `couplings` needs order >= 2"),
            },
            other => bail!("unknown solver kind `{other}`"),
        }
        Ok(())
    }
}

/// Single flow of one potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowStudy {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub flow: FlowConfig,
}

/// Observable comparison over a coupling axis and a set of methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepStudy {
    /// `single_well`, `double_well`, or `asymmetric_well`.
    pub family: String,
    /// Axis values (bare quartic coupling λ0); sorted and deduplicated.
    pub values: Vec<f64>,
    /// Fixed tilt for the asymmetric family.
    #[serde(default)]
    pub h0: f64,
    /// Any of `grid`, `couplings`, `oracle`, `perturbation2`, `instanton`.
    pub methods: Vec<String>,
    /// Truncation order for the couplings method.
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub shift_to_minimum: bool,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub flow: FlowConfig,
    /// Axis values where solver failure is the expected outcome.
    #[serde(default)]
    pub expected_failures: Vec<f64>,
    /// Eigenstates requested from the oracle.
    #[serde(default = "default_oracle_states")]
    pub oracle_states: usize,
}

fn default_order() -> usize {
    12
}

fn default_oracle_states() -> usize {
    2
}

/// Dimensionless flow trajectories and basin classification on a seed grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDiagramStudy {
    pub order: usize,
    pub n2: usize,
    pub n4: usize,
    pub a2_range: (f64, f64),
    pub a4_range: (f64, f64),
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Write one trajectory CSV per seed (off by default: n2·n4 files).
    #[serde(default)]
    pub write_trajectories: bool,
    #[serde(default = "default_trajectory_points")]
    pub trajectory_points: usize,
}

fn default_t_max() -> f64 {
    6.0
}

fn default_trajectory_points() -> usize {
    61
}

/// Fixed-point search over truncation orders.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointsStudy {
    pub orders: Vec<usize>,
    #[serde(default = "default_a2_box")]
    pub a2_range: (f64, f64),
    #[serde(default = "default_a4_box")]
    pub a4_range: (f64, f64),
    #[serde(default = "default_per_axis")]
    pub per_axis: usize,
}

fn default_a2_box() -> (f64, f64) {
    (-0.9, 0.6)
}

fn default_a4_box() -> (f64, f64) {
    (0.1, 5.0)
}

fn default_per_axis() -> usize {
    7
}

/// Supersymmetry-breaking scan over the superpotential coupling `g`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SusyStudy {
    pub g_values: Vec<f64>,
    #[serde(default = "default_susy_order")]
    pub order: usize,
    /// Expansion point policy; the classical minimum by default.
    #[serde(default = "default_true")]
    pub shift_to_minimum: bool,
    /// Half-width of the spatial domain for the grid solver.
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    /// Node count of the spatial domain for the grid solver.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub expected_failures: Vec<f64>,
}

fn default_susy_order() -> usize {
    16
}

fn default_true() -> bool {
    true
}

/// Two-particle gap scan over interaction forms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoParticleStudy {
    pub lambda0: f64,
    pub interactions: Vec<Interaction>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub flow: FlowConfig,
    /// Indices into `interactions` where failure is expected.
    #[serde(default)]
    pub expected_failures: Vec<usize>,
}

/// Pole-dominance diagnostics over a coupling axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolesStudy {
    /// `single_well`, `double_well`, or `asymmetric_well`.
    pub family: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub h0: f64,
    #[serde(default = "default_n_states")]
    pub n_states: usize,
    #[serde(default)]
    pub expected_failures: Vec<f64>,
}

fn default_n_states() -> usize {
    40
}

/// Builds the one-particle potential of a named family at coupling `v`.
pub fn family_potential(family: &str, v: f64, h0: f64) -> Result<nprg::potentials::Polynomial1D> {
    Ok(match family {
        "single_well" => nprg::potentials::single_well(v),
        "double_well" => nprg::potentials::double_well(v),
        "asymmetric_well" => nprg::potentials::asymmetric_well(v, h0),
        other => bail!("unknown potential family `{other}`"),
    })
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            StudyConfig::Flow(c) => c.solver.validate(),
            StudyConfig::Sweep(c) => {
                if c.values.is_empty() {
                    bail!("sweep needs at least one axis value");
                }
                if c.methods.is_empty() {
                    bail!("sweep needs at least one method");
                }
                for m in &c.methods {
                    if !["grid", "couplings", "oracle", "perturbation2", "instanton"]
                        .contains(&m.as_str())
                    {
                        bail!("unknown sweep method `{m}`");
                    }
                }
                family_potential(&c.family, c.values[0], c.h0).map(|_| ())
            }
            StudyConfig::FlowDiagram(c) => {
                if c.order < 4 || c.order % 2 != 0 {
                    bail!("flow_diagram needs an even order >= 4");
                }
                if c.n2 < 2 || c.n4 < 2 {
                    bail!("seed grid needs at least 2 points per axis");
                }
                Ok(())
            }
            StudyConfig::FixedPoints(c) => {
                if c.orders.iter().any(|&n| n < 4 || n % 2 != 0) {
                    bail!("fixed_points orders must be even and >= 4");
                }
                Ok(())
            }
            StudyConfig::Susy(c) => {
                if c.g_values.is_empty() {
                    bail!("susy needs at least one g value");
                }
                if c.order < 4 {
                    bail!("susy needs order >= 4");
                }
                Ok(())
            }
            StudyConfig::TwoParticle(c) => {
                if c.interactions.is_empty() {
                    bail!("two_particle needs at least one interaction");
                }
                if c.order < 4 {
                    bail!("two_particle needs order >= 4");
                }
                Ok(())
            }
            StudyConfig::Poles(c) => {
                if c.values.is_empty() {
                    bail!("poles needs at least one axis value");
                }
                if c.n_states < 2 {
                    bail!("poles needs at least 2 states");
                }
                family_potential(&c.family, c.values[0], c.h0).map(|_| ())
            }
        }
    }
}
