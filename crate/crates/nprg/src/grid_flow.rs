//! Method-of-lines integration of the one-variable flow on a spatial grid.
//!
//! The potential is discretized on [`Grid1D`] nodes and lowered from `Λ₀` to
//! `Λ_IR` in the logarithmic variable `s = ln(Λ₀/Λ)`:
//!
//! ```text
//! Λ ∂V/∂Λ = -(Λ/2π) ln(1 + V''(x)/Λ²)      =>      dV/ds = +(Λ/2π) ln(1 + V''(x)/Λ²)
//! ```
//!
//! with `V''` from central second differences (one-sided at the two boundary
//! nodes). The constant (vacuum-energy) part of `V` is physical here and is
//! never subtracted. Snapshots are recorded at scheduled cutoffs; completed
//! flows can additionally carry an *effective* (`Λ = 0`) potential with the
//! analytic boundary tails of [`crate::tails`] applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, GridPotential};
use crate::ode::{self, StepControl, StopReason};
use crate::potentials::Polynomial1D;
use crate::tails;
use crate::FLOW_PREFACTOR;

/// Scale window, step control, snapshot schedule, and guard settings for a
/// flow integration. Shared by the grid and coupling solvers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    /// Ultraviolet starting cutoff.
    pub lambda0: f64,
    /// Infrared endpoint of the integration window.
    pub lambda_ir: f64,
    /// Relative step-control tolerance.
    pub rel_tol: f64,
    /// Absolute step-control tolerance.
    pub abs_tol: f64,
    /// Cutoff values at which to record intermediate snapshots. Values
    /// outside `(lambda_ir, lambda0)` are ignored; the initial and final
    /// potentials are always recorded.
    pub snapshot_lambdas: Vec<f64>,
    /// Lower guard on the log argument `1 + V''/Λ²`; at or below it the
    /// evaluation fails loudly instead of regularizing. Flows that complete
    /// keep the argument well above ~0.5 before recovering, while pole-bound
    /// flows collapse through this range exponentially fast but then track
    /// the singularity from above, which an explicit integrator can only
    /// follow at unbounded cost. The default cuts that chase off early; lower
    /// it explicitly to push closer to the singular locus.
    pub spinodal_guard: f64,
    /// Attach the analytic `Λ > Λ₀` and `Λ < Λ_IR` tail corrections to
    /// completed flows as a separate effective potential.
    pub boundary_completion: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            lambda0: 100.0,
            lambda_ir: 1e-3,
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            snapshot_lambdas: default_snapshot_schedule(),
            spinodal_guard: 1e-4,
            boundary_completion: true,
        }
    }
}

/// Two snapshots per decade across the default `[1e-3, 100]` window.
fn default_snapshot_schedule() -> Vec<f64> {
    let mut v = Vec::new();
    for k in (-2..=1).rev() {
        let base = 10f64.powi(k);
        v.push(3.0 * base * 10.0);
        v.push(base * 10.0);
    }
    // 30, 10, 3, 1, 0.3, 0.1, 0.03, 0.01, 0.003
    v.push(3e-3);
    v
}

impl FlowConfig {
    /// Checks the scale ordering and tolerance positivity.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda_ir.is_finite()) {
            return Err(Error::InvalidConfig("cutoffs must be finite".into()));
        }
        if !(0.0 < self.lambda_ir && self.lambda_ir < self.lambda0) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < lambda_ir < lambda0, got lambda_ir = {}, lambda0 = {}",
                self.lambda_ir, self.lambda0
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.spinodal_guard > 0.0) {
            return Err(Error::InvalidConfig("spinodal guard must be positive".into()));
        }
        Ok(())
    }

    /// Integration checkpoints in `s = ln(Λ₀/Λ)`: the scheduled snapshots
    /// inside the window (sorted by decreasing `Λ`) plus the endpoint.
    pub(crate) fn checkpoints_in_s(&self) -> Vec<f64> {
        let mut lambdas: Vec<f64> = self
            .snapshot_lambdas
            .iter()
            .copied()
            .filter(|&l| l > self.lambda_ir && l < self.lambda0)
            .collect();
        lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        lambdas.dedup();
        let mut s: Vec<f64> = lambdas.iter().map(|&l| (self.lambda0 / l).ln()).collect();
        s.push((self.lambda0 / self.lambda_ir).ln());
        s
    }

    pub(crate) fn step_control(&self) -> StepControl {
        StepControl { rel_tol: self.rel_tol, abs_tol: self.abs_tol, ..StepControl::default() }
    }
}

/// How a flow integration ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// The infrared endpoint was reached.
    Completed,
    /// The log argument `1 + V''/Λ²` hit the guard at node `x`.
    Spinodal { lambda: f64, x: f64 },
    /// The curvature ran into `Λ² + V''(0) ≤ 0` (the dimensionless
    /// curvature approaching -1), the known truncation failure mode.
    MassPole { lambda: f64 },
    /// Step control collapsed without a recognized cause.
    StepUnderflow { lambda: f64 },
    /// The integrator spent its step budget, the signature of a flow
    /// tracking the singularity without quite reaching the guard.
    StepBudget { lambda: f64 },
}

impl Termination {
    /// True when the flow reached the infrared endpoint.
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

/// Result of a grid flow: scheduled snapshots (strictly decreasing `Λ`),
/// the termination status, and — for completed flows with boundary
/// completion enabled — the tail-corrected effective potential.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub snapshots: Vec<GridPotential>,
    pub termination: Termination,
    /// Tail-completed potential tagged `lambda = 0`; the scheduled snapshots
    /// stay raw so they remain comparable to closed-form trajectories.
    pub effective: Option<GridPotential>,
    /// Accepted integrator steps (diagnostic).
    pub steps: usize,
}

impl FlowTrajectory {
    /// The potential observables should be extracted from: the effective
    /// (tail-completed) one when present, otherwise the last snapshot.
    pub fn final_potential(&self) -> &GridPotential {
        self.effective.as_ref().unwrap_or_else(|| {
            self.snapshots.last().expect("trajectory always holds the initial snapshot")
        })
    }
}

/// Scale derivative `Λ·∂V/∂Λ` at every grid node.
///
/// Fails with the offending `(Λ, x)` as soon as the log argument
/// `1 + V''(x_i)/Λ²` drops to `spinodal_guard` or below; nodes are scanned
/// left to right.
pub fn beta_grid(v: &GridPotential, spinodal_guard: f64) -> Result<Vec<f64>> {
    let lambda = v.lambda;
    let vpp = v.second_derivative();
    let inv_l2 = 1.0 / (lambda * lambda);
    let mut out = Vec::with_capacity(vpp.len());
    for (i, &c) in vpp.iter().enumerate() {
        let arg = 1.0 + c * inv_l2;
        if arg <= spinodal_guard {
            return Err(Error::Spinodal { lambda, x: v.grid.x(i) });
        }
        out.push(-FLOW_PREFACTOR * lambda * arg.ln());
    }
    Ok(out)
}

/// Node with the smallest log argument when it is parked near the pole.
///
/// A step collapse or a spent budget with `min_x 1 + V''/Λ²` pinned close
/// to zero is the singularity reached asymptotically rather than crossed;
/// report it as the spinodal hit at the responsible node.
fn near_pole_node(v: &GridPotential) -> Option<f64> {
    let inv_l2 = 1.0 / (v.lambda * v.lambda);
    let vpp = v.second_derivative();
    let (mut arg_min, mut x_min) = (f64::INFINITY, 0.0);
    for (i, &c) in vpp.iter().enumerate() {
        let arg = 1.0 + c * inv_l2;
        if arg < arg_min {
            arg_min = arg;
            x_min = v.grid.x(i);
        }
    }
    (arg_min < 0.01).then_some(x_min)
}

/// Integrates the grid flow of `v0` from `Λ₀` down to `Λ_IR`.
///
/// The bare polynomial is sampled on `grid` at `Λ₀`; integration runs in
/// `s = ln(Λ₀/Λ)` with adaptive embedded Runge-Kutta stepping and lands
/// exactly on each scheduled snapshot scale. A spinodal hit or step
/// collapse ends the flow early with a partial trajectory whose last
/// snapshot is the last accepted state.
pub fn evolve_grid(v0: &Polynomial1D, grid: &Grid1D, cfg: &FlowConfig) -> Result<FlowTrajectory> {
    cfg.validate()?;
    v0.check_flow_input()?;
    let lambda0 = cfg.lambda0;
    let initial = GridPotential::sample(v0, grid.clone(), lambda0);
    // Fail fast (with the precise node) if the bare potential already
    // violates the guard at Λ₀.
    beta_grid(&initial, cfg.spinodal_guard)?;

    let guard = cfg.spinodal_guard;
    let h = grid.h();
    let n = grid.n_points();
    let mut snapshots = vec![initial.clone()];
    let checkpoints = cfg.checkpoints_in_s();

    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let lambda = lambda0 * (-s).exp();
        let inv_l2 = 1.0 / (lambda * lambda);
        let pref = FLOW_PREFACTOR * lambda;
        // dV/ds = -Λ ∂V/∂Λ = +(Λ/2π) ln(1 + V''/Λ²).
        let vpp = crate::grid::second_derivative_of(y, h);
        for i in 0..n {
            let arg = 1.0 + vpp[i] * inv_l2;
            if arg <= guard {
                return Err(Error::Spinodal { lambda, x: grid.x(i) });
            }
            dy[i] = pref * arg.ln();
        }
        Ok(())
    };

    let outcome = ode::integrate(
        rhs,
        0.0,
        initial.values.clone(),
        &checkpoints,
        &cfg.step_control(),
        |s, y| {
            let lambda = lambda0 * (-s).exp();
            snapshots.push(GridPotential { grid: grid.clone(), lambda, values: y.to_vec() });
        },
    )?;

    // Landing exactly on the endpoint leaves Λ = Λ₀·e^{-s_end} with a
    // floating-point wobble; pin the recorded value.
    if let Some(last) = snapshots.last_mut() {
        if outcome.reason == StopReason::Completed {
            last.lambda = cfg.lambda_ir;
        }
    }

    let termination = match outcome.reason {
        StopReason::Completed => Termination::Completed,
        StopReason::RhsRejected { t, cause } => {
            let lambda = lambda0 * (-t).exp();
            snapshots.push(GridPotential { grid: grid.clone(), lambda, values: outcome.y.clone() });
            match cause {
                Error::Spinodal { lambda, x } => Termination::Spinodal { lambda, x },
                Error::MassPole { lambda } => Termination::MassPole { lambda },
                other => return Err(other),
            }
        }
        StopReason::StepUnderflow { t } => {
            let lambda = lambda0 * (-t).exp();
            snapshots.push(GridPotential { grid: grid.clone(), lambda, values: outcome.y.clone() });
            near_pole_node(snapshots.last().unwrap())
                .map_or(Termination::StepUnderflow { lambda }, |x| Termination::Spinodal {
                    lambda,
                    x,
                })
        }
        StopReason::StepBudget { t } => {
            let lambda = lambda0 * (-t).exp();
            snapshots.push(GridPotential { grid: grid.clone(), lambda, values: outcome.y.clone() });
            near_pole_node(snapshots.last().unwrap())
                .map_or(Termination::StepBudget { lambda }, |x| Termination::Spinodal {
                    lambda,
                    x,
                })
        }
    };

    let effective = if termination.is_completed() && cfg.boundary_completion {
        Some(completed_potential(v0, snapshots.last().unwrap(), cfg))
    } else {
        None
    };

    Ok(FlowTrajectory { snapshots, termination, effective, steps: outcome.steps })
}

/// Applies the analytic boundary tails to the final snapshot.
///
/// The ultraviolet tail integrates the bare curvature above `Λ₀` (couplings
/// do not run there); the infrared tail integrates the final curvature below
/// `Λ_IR` (the flow is frozen for `Λ ≪ m_eff`). The infrared part needs
/// positive curvature everywhere and is skipped wholesale if any node's
/// final `V''` is non-positive; the ultraviolet part is always applied.
fn completed_potential(v0: &Polynomial1D, last: &GridPotential, cfg: &FlowConfig) -> GridPotential {
    let grid = &last.grid;
    let mut values = last.values.clone();
    for (i, value) in values.iter_mut().enumerate() {
        let c_bare = v0.second_derivative_at(grid.x(i));
        // c > -Λ₀² always holds here: check_flow_input bounds the curvature
        // on the sampled domain well away from -1e4.
        *value += tails::uv_tail(c_bare, cfg.lambda0)
            .expect("bare curvature within the ultraviolet tail domain");
    }
    let vpp_final = last.second_derivative();
    if vpp_final.iter().all(|&c| c > 0.0) {
        for (value, &c) in values.iter_mut().zip(&vpp_final) {
            *value += tails::ir_tail(c, cfg.lambda_ir).expect("positive curvature checked above");
        }
    }
    GridPotential { grid: grid.clone(), lambda: 0.0, values }
}

/// Renders a trajectory's snapshots as CSV with columns `lambda,x,V`, one
/// row per node per snapshot, values at full precision for byte-stable
/// reruns.
pub fn trajectory_csv(traj: &FlowTrajectory) -> String {
    let mut out = String::from("lambda,x,V\n");
    for snap in &traj.snapshots {
        push_potential_rows(&mut out, snap);
    }
    out
}

/// Renders a single potential as `lambda,x,V` rows (used for the effective
/// potential, which is tagged `lambda = 0`).
pub fn potential_csv(v: &GridPotential) -> String {
    let mut out = String::from("lambda,x,V\n");
    push_potential_rows(&mut out, v);
    out
}

fn push_potential_rows(out: &mut String, snap: &GridPotential) {
    use std::fmt::Write as _;
    for (i, &v) in snap.values.iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", snap.lambda, snap.grid.x(i), v).unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn config_validation_rejects_bad_windows() {
        let mut cfg = FlowConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.lambda_ir = 200.0;
        assert!(cfg.validate().is_err());
        let mut cfg = FlowConfig { rel_tol: -1.0, ..FlowConfig::default() };
        assert!(cfg.validate().is_err());
        cfg = FlowConfig { lambda_ir: 0.0, ..FlowConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn beta_grid_constant_curvature_is_uniform() {
        // V = x²/2 has V'' ≡ 1: every node carries -(1/2π)·ln 2.
        let grid = Grid1D::new(-4.0, 4.0, 201).unwrap();
        let v = GridPotential::sample(&Polynomial1D::new(vec![0.0, 0.0, 0.5]), grid, 1.0);
        let beta = beta_grid(&v, 1e-10).unwrap();
        let expect = -FLOW_PREFACTOR * std::f64::consts::LN_2;
        for b in beta {
            assert_relative_eq!(b, expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn beta_grid_vanishes_on_flat_potential() {
        let grid = Grid1D::new(-4.0, 4.0, 101).unwrap();
        let v = GridPotential::sample(&Polynomial1D::new(vec![0.0]), grid, 1.0);
        for b in beta_grid(&v, 1e-10).unwrap() {
            assert_eq!(b, 0.0);
        }
    }

    #[test]
    fn beta_grid_origin_node_of_shallow_double_well() {
        // V = 0.2x⁴ - x²/2 at Λ = 2: V''(0) = -1 so the origin node reads
        // -(2/2π)·ln(3/4), which is positive.
        let grid = Grid1D::new(-4.0, 4.0, 401).unwrap();
        let v = GridPotential::sample(&Polynomial1D::new(vec![0.0, 0.0, -0.5, 0.0, 0.2]), grid, 2.0);
        let beta = beta_grid(&v, 1e-10).unwrap();
        let origin = 200;
        assert_eq!(v.grid.x(origin), 0.0);
        let expect = -(2.0 * FLOW_PREFACTOR) * 0.75f64.ln();
        // The stencil carries an O(h²·V'''') bias (~2e-4 relative here).
        assert_relative_eq!(beta[origin], expect, max_relative = 1e-3);
        assert!(beta[origin] > 0.0);
    }

    #[test]
    fn beta_grid_reports_first_offending_node() {
        // V'' = -1.5 at Λ = 1 violates the guard everywhere; the leftmost
        // node must be reported.
        let grid = Grid1D::new(-2.0, 2.0, 41).unwrap();
        let v = GridPotential::sample(&Polynomial1D::new(vec![0.0, 0.0, -0.75]), grid, 1.0);
        match beta_grid(&v, 1e-10) {
            Err(Error::Spinodal { lambda, x }) => {
                assert_eq!(lambda, 1.0);
                assert_eq!(x, -2.0);
            }
            other => panic!("expected spinodal, got {other:?}"),
        }
    }

    #[test]
    fn harmonic_flow_reproduces_zero_point_energy() {
        // m = 1: V_eff(0) -> m/2 with an unchanged quadratic coefficient.
        let cfg = FlowConfig::default();
        let grid = Grid1D::default_flow_domain();
        let traj = evolve_grid(&Polynomial1D::new(vec![0.0, 0.0, 0.5]), &grid, &cfg).unwrap();
        assert!(traj.termination.is_completed());
        let last = traj.snapshots.last().unwrap();
        assert_eq!(last.lambda, cfg.lambda_ir);

        let eff = traj.effective.as_ref().expect("completion enabled by default");
        let i0 = grid.n_points() / 2;
        assert_eq!(grid.x(i0), 0.0);
        assert_abs_diff_eq!(eff.values[i0], 0.5, epsilon = 1e-3);
        // Curvature (twice the quadratic coefficient) must not run.
        let vpp = eff.second_derivative();
        assert_abs_diff_eq!(vpp[i0] / 2.0, 0.5, epsilon = 1e-6);
        // Raw window misses the tails by ~4e-3, so completion is doing real
        // work here.
        assert!((last.values[i0] - 0.5).abs() > 1e-3);
    }

    #[test]
    fn snapshots_follow_the_schedule_in_decreasing_order() {
        let cfg = FlowConfig {
            snapshot_lambdas: vec![10.0, 1.0, 0.1, 500.0, 1e-9],
            ..FlowConfig::default()
        };
        let grid = Grid1D::new(-6.0, 6.0, 301).unwrap();
        let traj = evolve_grid(&Polynomial1D::new(vec![0.0, 0.0, 0.5]), &grid, &cfg).unwrap();
        let lambdas: Vec<f64> = traj.snapshots.iter().map(|s| s.lambda).collect();
        assert_eq!(lambdas.len(), 5); // Λ₀, 10, 1, 0.1, Λ_IR (out-of-window dropped)
        assert_eq!(lambdas[0], 100.0);
        assert_relative_eq!(lambdas[1], 10.0, max_relative = 1e-12);
        assert_relative_eq!(lambdas[2], 1.0, max_relative = 1e-12);
        assert_relative_eq!(lambdas[3], 0.1, max_relative = 1e-12);
        assert_eq!(lambdas[4], cfg.lambda_ir);
        for w in lambdas.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn spinodal_mid_flow_returns_partial_trajectory() {
        // V = 3.5e-4·x¹⁰ - 0.4x² from Λ₀ = 1: the origin argument
        // 1 - 0.8/Λ² dives toward zero once Λ < √0.8. The diffusion term
        // eventually props it up at the grid scale (the full flow
        // convexifies), so a mid-flow abort is tested with a guard the
        // plunge actually crosses, around Λ ≈ 0.914.
        let cfg = FlowConfig {
            lambda0: 1.0,
            snapshot_lambdas: vec![0.95],
            spinodal_guard: 0.05,
            ..FlowConfig::default()
        };
        let grid = Grid1D::new(-6.0, 6.0, 301).unwrap();
        let v0 = Polynomial1D::new(vec![
            0.0, 0.0, -0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.5e-4,
        ]);
        let traj = evolve_grid(&v0, &grid, &cfg).unwrap();
        match traj.termination {
            Termination::Spinodal { lambda, x } => {
                assert!(lambda > 0.5 && lambda < 1.0, "lambda = {lambda}");
                assert!(x.abs() < 1.0, "x = {x}");
            }
            ref other => panic!("expected spinodal, got {other:?}"),
        }
        assert!(traj.effective.is_none());
        // Partial trajectory: initial, the Λ=0.95 snapshot, and the last
        // accepted state.
        assert!(traj.snapshots.len() >= 3);
        assert!(traj.snapshots.last().unwrap().lambda < 0.95);
    }

    #[test]
    fn initial_guard_violation_is_an_error() {
        // At Λ₀ = 1 the bare curvature -1.2 puts the argument at -0.2
        // before the first step (comfortably past any stencil bias).
        let cfg = FlowConfig { lambda0: 1.0, ..FlowConfig::default() };
        let grid = Grid1D::new(-6.0, 6.0, 301).unwrap();
        let v0 = Polynomial1D::new(vec![0.0, 0.0, -0.6, 0.0, 0.005]);
        match evolve_grid(&v0, &grid, &cfg) {
            Err(Error::Spinodal { lambda, .. }) => assert_eq!(lambda, 1.0),
            other => panic!("expected spinodal error, got {other:?}"),
        }
    }

    #[test]
    fn csv_export_has_header_and_full_precision() {
        let cfg = FlowConfig {
            lambda0: 2.0,
            lambda_ir: 1.0,
            snapshot_lambdas: vec![],
            boundary_completion: false,
            ..FlowConfig::default()
        };
        let grid = Grid1D::new(-1.0, 1.0, 11).unwrap();
        let traj = evolve_grid(&Polynomial1D::new(vec![0.0, 0.0, 0.5]), &grid, &cfg).unwrap();
        let csv = trajectory_csv(&traj);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "lambda,x,V");
        assert_eq!(csv.lines().count(), 1 + 2 * 11);
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 3);
        assert!(first.starts_with("2.0000000000000000e0,-1.0000000000000000e0"));
    }

    #[test]
    fn even_symmetry_is_preserved_along_the_flow() {
        let cfg = FlowConfig { lambda0: 10.0, lambda_ir: 0.1, ..FlowConfig::default() };
        let grid = Grid1D::new(-6.0, 6.0, 301).unwrap();
        let traj = evolve_grid(&potentials::double_well(0.3), &grid, &cfg).unwrap();
        for snap in &traj.snapshots {
            let n = snap.values.len();
            for i in 0..n {
                let diff = (snap.values[i] - snap.values[n - 1 - i]).abs();
                assert!(diff < 1e-10, "asymmetry {diff} at snapshot Λ = {}", snap.lambda);
            }
        }
    }
}
