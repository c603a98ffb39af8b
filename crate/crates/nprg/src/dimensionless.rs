//! Dimensionless couplings and their autonomous flow.
//!
//! Rescaling couplings by the cutoff,
//!
//! ```text
//! â_n = a_n · Λ^{-(n+2)/2} ,        t = ln(Λ₀/Λ) ,
//! ```
//!
//! removes the explicit scale from the flow:
//!
//! ```text
//! dâ_n/dt = ((n+2)/2)·â_n - n!·[φⁿ] ( -(1/2π)·ln(1 + V̂''(φ)/1) )
//! ```
//!
//! i.e. the scale derivative of the dimensionful couplings evaluated at
//! `Λ = 1` with `a = â`. The autonomous system exposes fixed points and
//! phase structure: trajectories either run to the symmetric phase
//! (`â₂ → +∞`), crash into the `â₂ = -1` pole (broken phase), or linger
//! undecided near a separatrix. Truncation at finite `N` creates a spurious
//! attractive fixed point whose basin — the false broken phase — shrinks as
//! `N` grows; [`broken_fraction`] measures exactly that.

use crate::coupling_flow::{beta_couplings, CouplingVector};
use crate::error::{Error, Result};
use crate::grid_flow::Termination;
use crate::ode::{self, StepControl, StopReason};
use crate::parallel::par_map;

/// Dimensionless couplings `â_0..â_N` at flow time `t = ln(Λ₀/Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimlessCouplingVector {
    pub t: f64,
    pub ahat: Vec<f64>,
}

impl DimlessCouplingVector {
    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.ahat.len() - 1
    }
}

/// Rescales dimensionful couplings at cutoff `c.lambda` into dimensionless
/// ones, with flow time measured from `lambda0`.
pub fn to_dimensionless(c: &CouplingVector, lambda0: f64) -> DimlessCouplingVector {
    let lambda = c.lambda;
    let ahat = c
        .a
        .iter()
        .enumerate()
        .map(|(n, &a)| a * lambda.powf(-((n as f64 + 2.0) / 2.0)))
        .collect();
    DimlessCouplingVector { t: (lambda0 / lambda).ln(), ahat }
}

/// Inverse of [`to_dimensionless`]: restores dimensionful couplings at
/// `Λ = Λ₀·e^{-t}`.
pub fn to_dimensionful(d: &DimlessCouplingVector, lambda0: f64) -> CouplingVector {
    let lambda = lambda0 * (-d.t).exp();
    let a = d
        .ahat
        .iter()
        .enumerate()
        .map(|(n, &ahat)| ahat * lambda.powf((n as f64 + 2.0) / 2.0))
        .collect();
    CouplingVector { lambda, a }
}

/// Flow derivatives `dâ_n/dt`. Autonomous: the `t` tag is never read, so
/// the output depends only on `ahat` (bit-identical across tags).
///
/// Requires `1 + â_2 > 0`; at or below the pole the evaluation fails with
/// a mass-pole diagnostic (tagged with the unit reference scale).
pub fn beta_dimensionless(d: &DimlessCouplingVector) -> Result<Vec<f64>> {
    let unit = CouplingVector { lambda: 1.0, a: d.ahat.clone() };
    let b = beta_couplings(&unit)?;
    Ok(d.ahat
        .iter()
        .zip(&b)
        .enumerate()
        .map(|(n, (&ahat, &bn))| ((n as f64 + 2.0) / 2.0) * ahat - bn)
        .collect())
}

/// A dimensionless trajectory sampled at uniform `t` checkpoints.
///
/// Early terminations reuse [`Termination`]; its `lambda` fields carry
/// `e^{-t}`, the cutoff in units of the starting scale.
#[derive(Debug, Clone)]
pub struct DimlessTrajectory {
    pub points: Vec<DimlessCouplingVector>,
    pub termination: Termination,
}

/// Integrates the dimensionless flow from `d0.t` for `t_span` more
/// e-folds, recording `n_points` uniformly spaced states (plus the seed).
pub fn evolve_dimensionless(
    d0: &DimlessCouplingVector,
    t_span: f64,
    n_points: usize,
) -> Result<DimlessTrajectory> {
    if !(t_span > 0.0) || n_points == 0 {
        return Err(Error::InvalidConfig("need a positive t span and at least one point".into()));
    }
    let checkpoints: Vec<f64> =
        (1..=n_points).map(|j| d0.t + t_span * j as f64 / n_points as f64).collect();
    let mut points = vec![d0.clone()];
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let state = DimlessCouplingVector { t: 0.0, ahat: y.to_vec() };
        let beta = beta_dimensionless(&state)?;
        dy.copy_from_slice(&beta);
        Ok(())
    };
    let ctrl = StepControl { rel_tol: 1e-10, abs_tol: 1e-12, ..StepControl::default() };
    let outcome = ode::integrate(rhs, d0.t, d0.ahat.clone(), &checkpoints, &ctrl, |t, y| {
        points.push(DimlessCouplingVector { t, ahat: y.to_vec() });
    })?;
    let termination = match outcome.reason {
        StopReason::Completed => Termination::Completed,
        StopReason::RhsRejected { t, cause } => {
            points.push(DimlessCouplingVector { t, ahat: outcome.y.clone() });
            match cause {
                Error::MassPole { .. } => Termination::MassPole { lambda: (-t).exp() },
                Error::Spinodal { x, .. } => Termination::Spinodal { lambda: (-t).exp(), x },
                other => return Err(other),
            }
        }
        StopReason::StepUnderflow { t } => {
            points.push(DimlessCouplingVector { t, ahat: outcome.y.clone() });
            if 1.0 + outcome.y[2] < 0.01 {
                Termination::MassPole { lambda: (-t).exp() }
            } else {
                Termination::StepUnderflow { lambda: (-t).exp() }
            }
        }
        StopReason::StepBudget { t } => {
            points.push(DimlessCouplingVector { t, ahat: outcome.y.clone() });
            if 1.0 + outcome.y[2] < 0.01 {
                Termination::MassPole { lambda: (-t).exp() }
            } else {
                Termination::StepBudget { lambda: (-t).exp() }
            }
        }
    };
    Ok(DimlessTrajectory { points, termination })
}

/// Renders a trajectory as CSV with columns `t,ahat_2,ahat_4,...` (the even
/// couplings that span flow diagrams), full precision.
pub fn trajectory_csv(traj: &DimlessTrajectory) -> String {
    use std::fmt::Write as _;
    let order = traj.points[0].order();
    let mut out = String::from("t");
    for n in (2..=order).step_by(2) {
        write!(out, ",ahat_{n}").unwrap();
    }
    out.push('\n');
    for p in &traj.points {
        write!(out, "{:.16e}", p.t).unwrap();
        for n in (2..=order).step_by(2) {
            write!(out, ",{:.16e}", p.ahat[n]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Phase reached by a dimensionless trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basin {
    /// `â₂` ran to large positive values: massive symmetric phase.
    Symmetric,
    /// The flow was captured by the `â₂ = -1` pole: (false) broken phase.
    Broken,
    /// Neither threshold was crossed within the time budget.
    Undecided,
}

/// Classifies the phase a seed flows to, integrating at most `t_max`
/// e-folds in segments and stopping as soon as a threshold is crossed
/// (`â₂ > 10` symmetric, `1 + â₂ < 0.02` or a pole hit broken).
pub fn classify_seed(d0: &DimlessCouplingVector, t_max: f64) -> Result<Basin> {
    const SEGMENT: f64 = 0.5;
    let decide = |ahat: &[f64]| -> Option<Basin> {
        if ahat[2] > 10.0 {
            Some(Basin::Symmetric)
        } else if 1.0 + ahat[2] < 0.02 {
            Some(Basin::Broken)
        } else {
            None
        }
    };
    if let Some(b) = decide(&d0.ahat) {
        return Ok(b);
    }
    let mut state = d0.clone();
    let t_end = d0.t + t_max;
    while state.t < t_end {
        let span = SEGMENT.min(t_end - state.t);
        let traj = evolve_dimensionless(&state, span, 1)?;
        state = traj.points.last().unwrap().clone();
        match traj.termination {
            Termination::Completed => {
                if let Some(b) = decide(&state.ahat) {
                    return Ok(b);
                }
            }
            Termination::MassPole { .. } | Termination::Spinodal { .. } => {
                return Ok(Basin::Broken);
            }
            Termination::StepUnderflow { .. } | Termination::StepBudget { .. } => {
                return Ok(decide(&state.ahat).unwrap_or(Basin::Undecided));
            }
        }
    }
    Ok(Basin::Undecided)
}

/// Uniform seed lattice in the `(â₂, â₄)` plane (higher couplings zero),
/// order `order`, tagged `t = 0`.
pub fn seed_grid(
    order: usize,
    n2: usize,
    n4: usize,
    a2_range: (f64, f64),
    a4_range: (f64, f64),
) -> Vec<DimlessCouplingVector> {
    assert!(order >= 4 && n2 >= 2 && n4 >= 2);
    let mut seeds = Vec::with_capacity(n2 * n4);
    for i in 0..n2 {
        let a2 = a2_range.0 + (a2_range.1 - a2_range.0) * i as f64 / (n2 - 1) as f64;
        for j in 0..n4 {
            let a4 = a4_range.0 + (a4_range.1 - a4_range.0) * j as f64 / (n4 - 1) as f64;
            let mut ahat = vec![0.0; order + 1];
            ahat[2] = a2;
            ahat[4] = a4;
            seeds.push(DimlessCouplingVector { t: 0.0, ahat });
        }
    }
    seeds
}

/// Fraction of seeds classified [`Basin::Broken`] (seeds that fail to
/// classify count as undecided, not broken). Runs the seeds in parallel.
pub fn broken_fraction(seeds: &[DimlessCouplingVector], t_max: f64) -> f64 {
    let labels = par_map(seeds.to_vec(), |s| classify_seed(&s, t_max));
    let broken = labels.iter().filter(|l| matches!(l, Ok(Basin::Broken))).count();
    broken as f64 / seeds.len() as f64
}
