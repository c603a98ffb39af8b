//! Truncated operator-expansion flow of polynomial couplings.
//!
//! The potential is carried as couplings of the factorial-normalized
//! expansion around a chosen point,
//!
//! ```text
//! V(φ) = Σ_{n=0..N} a_n φⁿ / n! ,
//! ```
//!
//! and the flow of every `a_n` is *generated*, not hand-coded: the
//! right-hand side is
//!
//! ```text
//! Λ da_n/dΛ = n! · [φⁿ] ( -(Λ/2π) · ln(1 + V''(φ)/Λ²) )
//! ```
//!
//! evaluated with truncated-power-series arithmetic, which reproduces the
//! familiar low-order beta functions (tested against hand-coded forms) and
//! extends them to arbitrary truncation order `N`. The known failure mode —
//! the running curvature hitting `Λ² + a_2 = 0` — terminates the flow with a
//! mass-pole diagnostic instead of being regularized.

use crate::error::{Error, Result};
use crate::grid_flow::{FlowConfig, Termination};
use crate::ode::{self, StopReason};
use crate::potentials::Polynomial1D;
use crate::series::TruncatedSeries1;
use crate::tails;
use crate::FLOW_PREFACTOR;

/// Factorials `0! ..= n!` as floats.
pub(crate) fn factorials(n: usize) -> Vec<f64> {
    let mut f = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    f.push(1.0);
    for k in 1..=n {
        acc *= k as f64;
        f.push(acc);
    }
    f
}

/// Couplings `a_0..a_N` of `V(φ) = Σ a_n φⁿ/n!` at cutoff `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingVector {
    pub lambda: f64,
    pub a: Vec<f64>,
}

impl CouplingVector {
    /// Validated constructor: positive finite cutoff, order at least 2.
    pub fn new(lambda: f64, a: Vec<f64>) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidConfig(format!("cutoff must be positive, got {lambda}")));
        }
        if a.len() < 3 {
            return Err(Error::InvalidConfig(
                "coupling vector needs order >= 2 (a_0, a_1, a_2 at minimum)".into(),
            ));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("couplings must be finite".into()));
        }
        Ok(Self { lambda, a })
    }

    /// Truncation order `N` (highest tracked power of `φ`).
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    /// Reads monomial coefficients `c_n` into couplings `a_n = n!·c_n`,
    /// zero-padded up to `order`.
    pub fn from_polynomial(p: &Polynomial1D, order: usize, lambda: f64) -> Result<Self> {
        if p.degree() > order {
            return Err(Error::InvalidConfig(format!(
                "polynomial degree {} exceeds truncation order {order}",
                p.degree()
            )));
        }
        let fact = factorials(order);
        let a = (0..=order).map(|n| fact[n] * p.coeff(n)).collect();
        Self::new(lambda, a)
    }

    /// Converts back to monomial coefficients `c_n = a_n/n!`.
    pub fn to_polynomial(&self) -> Polynomial1D {
        let fact = factorials(self.order());
        Polynomial1D::new(self.a.iter().enumerate().map(|(n, &a)| a / fact[n]).collect())
    }

    /// `V''(φ)` as a truncated series in `φ` (same order, top two
    /// coefficients zero): `[φᵏ] V'' = a_{k+2}/k!`.
    pub fn curvature_series(&self) -> TruncatedSeries1 {
        let n = self.order();
        let fact = factorials(n);
        let mut u = TruncatedSeries1::zero(n);
        for k in 0..=n.saturating_sub(2) {
            u.coeffs_mut()[k] = self.a[k + 2] / fact[k];
        }
        u
    }
}

/// Scale derivatives `Λ·da_n/dΛ` for `n = 0..N`.
///
/// Requires `Λ² + a_2 > 0`; at or below zero the flow has hit the mass
/// pole (`â_2 = -1`) and the evaluation fails with that diagnostic.
pub fn beta_couplings(c: &CouplingVector) -> Result<Vec<f64>> {
    beta_couplings_guarded(c, 0.0)
}

/// Like [`beta_couplings`] but failing already when `1 + a_2/Λ²` is at or
/// below `guard` (the flow integrator passes its spinodal guard here so a
/// doomed trajectory stops a hair before the singularity).
pub(crate) fn beta_couplings_guarded(c: &CouplingVector, guard: f64) -> Result<Vec<f64>> {
    let lambda = c.lambda;
    let n = c.order();
    debug_assert!(n >= 2);
    let a2 = c.a[2];
    if 1.0 + a2 / (lambda * lambda) <= guard {
        return Err(Error::MassPole { lambda });
    }
    let u = c.curvature_series().scale(1.0 / (lambda * lambda));
    let ln = u.log1p()?;
    let fact = factorials(n);
    let pref = -FLOW_PREFACTOR * lambda;
    Ok((0..=n).map(|k| pref * fact[k] * ln.coeff(k)).collect())
}

/// Result of a coupling flow: snapshots at the scheduled cutoffs (strictly
/// decreasing `Λ`), the termination status, and — for completed flows with
/// boundary completion enabled — the tail-corrected effective couplings
/// tagged `lambda = 0`.
#[derive(Debug, Clone)]
pub struct CouplingTrajectory {
    pub snapshots: Vec<CouplingVector>,
    pub termination: Termination,
    pub effective: Option<CouplingVector>,
    /// Accepted integrator steps (diagnostic).
    pub steps: usize,
}

impl CouplingTrajectory {
    /// The couplings observables should be extracted from: the effective
    /// (tail-completed) ones when present, otherwise the last snapshot.
    pub fn final_couplings(&self) -> &CouplingVector {
        self.effective.as_ref().unwrap_or_else(|| {
            self.snapshots.last().expect("trajectory always holds the initial snapshot")
        })
    }
}

/// Integrates the coupling flow of `c0` from `Λ₀` down to `Λ_IR`.
///
/// `c0.lambda` must equal `cfg.lambda0`. Same stepping, snapshot, and
/// termination semantics as the grid flow; a mid-flow mass pole ends the
/// trajectory early with the partial snapshots (this is the expected
/// weak-coupling double-well failure).
pub fn evolve_couplings(c0: &CouplingVector, cfg: &FlowConfig) -> Result<CouplingTrajectory> {
    cfg.validate()?;
    if (c0.lambda - cfg.lambda0).abs() > 1e-12 * cfg.lambda0 {
        return Err(Error::InvalidConfig(format!(
            "initial couplings are tagged lambda = {}, config says lambda0 = {}",
            c0.lambda, cfg.lambda0
        )));
    }
    if c0.a.len() < 3 {
        return Err(Error::InvalidConfig("coupling vector needs order >= 2".into()));
    }
    let lambda0 = cfg.lambda0;
    let order = c0.order();
    let guard = cfg.spinodal_guard;

    let mut snapshots = vec![CouplingVector { lambda: lambda0, a: c0.a.clone() }];
    let checkpoints = cfg.checkpoints_in_s();

    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let lambda = lambda0 * (-s).exp();
        let state = CouplingVector { lambda, a: y.to_vec() };
        let beta = beta_couplings_guarded(&state, guard)?;
        // da/ds = -Λ da/dΛ.
        for (d, b) in dy.iter_mut().zip(&beta) {
            *d = -b;
        }
        Ok(())
    };

    let outcome = ode::integrate(
        rhs,
        0.0,
        c0.a.clone(),
        &checkpoints,
        &cfg.step_control(),
        |s, y| {
            let lambda = lambda0 * (-s).exp();
            snapshots.push(CouplingVector { lambda, a: y.to_vec() });
        },
    )?;

    if let Some(last) = snapshots.last_mut() {
        if outcome.reason == StopReason::Completed {
            last.lambda = cfg.lambda_ir;
        }
    }

    let termination = match outcome.reason {
        StopReason::Completed => Termination::Completed,
        StopReason::RhsRejected { t, cause } => {
            let lambda = lambda0 * (-t).exp();
            snapshots.push(CouplingVector { lambda, a: outcome.y.clone() });
            match cause {
                Error::MassPole { lambda } => Termination::MassPole { lambda },
                Error::Spinodal { lambda, x } => Termination::Spinodal { lambda, x },
                other => return Err(other),
            }
        }
        StopReason::StepUnderflow { t } => {
            let lambda = lambda0 * (-t).exp();
            snapshots.push(CouplingVector { lambda, a: outcome.y.clone() });
            // A step collapse with the curvature parked against the pole is
            // the pole, reached asymptotically rather than crossed.
            if 1.0 + outcome.y[2] / (lambda * lambda) < 0.01 {
                Termination::MassPole { lambda }
            } else {
                Termination::StepUnderflow { lambda }
            }
        }
        StopReason::StepBudget { t } => {
            let lambda = lambda0 * (-t).exp();
            snapshots.push(CouplingVector { lambda, a: outcome.y.clone() });
            if 1.0 + outcome.y[2] / (lambda * lambda) < 0.01 {
                Termination::MassPole { lambda }
            } else {
                Termination::StepBudget { lambda }
            }
        }
    };

    let effective = if termination.is_completed() && cfg.boundary_completion {
        Some(completed_couplings(c0, snapshots.last().unwrap(), cfg, order))
    } else {
        None
    };

    Ok(CouplingTrajectory { snapshots, termination, effective, steps: outcome.steps })
}

/// Applies the analytic boundary tails in series form (same policy as the
/// grid flow: ultraviolet tail from the bare curvature, infrared tail from
/// the final curvature, the latter skipped unless the curvature at the
/// expansion point is positive).
fn completed_couplings(
    c0: &CouplingVector,
    last: &CouplingVector,
    cfg: &FlowConfig,
    order: usize,
) -> CouplingVector {
    let fact = factorials(order);
    let mut a = last.a.clone();

    let uv = tails::uv_tail_series(&c0.curvature_series(), cfg.lambda0)
        .expect("flow start already required lambda0^2 + a_2 > 0");
    for n in 0..=order {
        a[n] += fact[n] * uv.coeff(n);
    }

    let c_final = last.curvature_series();
    if c_final.coeff(0) > 0.0 {
        let ir = tails::ir_tail_series(&c_final, cfg.lambda_ir)
            .expect("positive constant term checked above");
        for n in 0..=order {
            a[n] += fact[n] * ir.coeff(n);
        }
    }

    CouplingVector { lambda: 0.0, a }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coupling_vector_round_trips_through_polynomials() {
        let p = Polynomial1D::new(vec![0.1, -0.2, 0.5, 0.0, 0.03]);
        let c = CouplingVector::from_polynomial(&p, 8, 10.0).unwrap();
        assert_eq!(c.a[2], 1.0); // 2! · 0.5
        assert_eq!(c.a[4], 24.0 * 0.03);
        assert_eq!(c.a[5], 0.0);
        let back = c.to_polynomial();
        for n in 0..=8 {
            assert_abs_diff_eq!(back.coeff(n), p.coeff(n), epsilon = 1e-15);
        }
        assert!(CouplingVector::from_polynomial(&p, 3, 10.0).is_err());
        assert!(CouplingVector::new(0.0, vec![0.0, 0.0, 1.0]).is_err());
        assert!(CouplingVector::new(1.0, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn curvature_series_matches_direct_differentiation() {
        // V = x⁴/4! couplings: a_4 = 1 → V'' = x²/2.
        let c = CouplingVector::new(1.0, vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let u = c.curvature_series();
        assert_eq!(u.coeff(0), 0.0);
        assert_eq!(u.coeff(2), 0.5);
        for &phi in &[-1.3, 0.4, 2.0] {
            let p = c.to_polynomial();
            assert_relative_eq!(u.eval(phi), p.second_derivative_at(phi), max_relative = 1e-12);
        }
    }

    #[test]
    fn quartic_only_beta_reproduces_the_low_order_terms() {
        // a = (0,0,0,0,1) at Λ=1: Λ da_2/dΛ = -(1/2π)·a_4/(Λ²+a_2) = -1/2π
        // and Λ da_4/dΛ = +(1/2π)·3a_4²/(Λ²+a_2)² = 3/2π.
        let c = CouplingVector::new(1.0, vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let beta = beta_couplings(&c).unwrap();
        assert_relative_eq!(beta[2], -FLOW_PREFACTOR, max_relative = 1e-14);
        assert_relative_eq!(beta[4], 3.0 * FLOW_PREFACTOR, max_relative = 1e-14);
        assert_eq!(beta[1], 0.0);
        assert_eq!(beta[3], 0.0);
        assert_eq!(beta[0], 0.0); // ln(1+0) at the origin
    }

    #[test]
    fn harmonic_beta_feeds_only_the_vacuum_term() {
        let m2 = 2.3;
        let c = CouplingVector::new(1.0, vec![0.0, 0.0, m2, 0.0, 0.0, 0.0]).unwrap();
        let beta = beta_couplings(&c).unwrap();
        assert_relative_eq!(beta[0], -FLOW_PREFACTOR * (1.0 + m2).ln(), max_relative = 1e-14);
        for n in 1..=5 {
            assert_eq!(beta[n], 0.0, "beta_{n} should vanish for a pure mass term");
        }
    }

    /// Hand-coded low-order beta functions (the published form of the ODE
    /// system, with A = Λ² + a_2): the independent oracle for the generator.
    fn hand_beta_0_to_4(lambda: f64, a: &[f64]) -> [f64; 5] {
        let p = FLOW_PREFACTOR * lambda;
        let big_a = lambda * lambda + a[2];
        let (a3, a4, a5, a6) = (a[3], a[4], a[5], a[6]);
        [
            -p * (a[2] / (lambda * lambda)).ln_1p(),
            -p * (a3 / big_a),
            -p * (a4 / big_a - a3 * a3 / big_a.powi(2)),
            -p * (a5 / big_a - 3.0 * a3 * a4 / big_a.powi(2) + 2.0 * a3.powi(3) / big_a.powi(3)),
            -p * (a6 / big_a - (4.0 * a3 * a5 + 3.0 * a4 * a4) / big_a.powi(2)
                + 12.0 * a3 * a3 * a4 / big_a.powi(3)
                - 6.0 * a3.powi(4) / big_a.powi(4)),
        ]
    }

    #[test]
    fn generated_beta_matches_hand_coded_low_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let lambda: f64 = rng.gen_range(0.5..2.0);
            let big_a: f64 = rng.gen_range(0.1..10.0);
            let a2 = big_a - lambda * lambda;
            let mut a = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-big_a..big_a), a2];
            for _ in 3..=6 {
                a.push(rng.gen_range(-big_a..big_a));
            }
            let c = CouplingVector::new(lambda, a.clone()).unwrap();
            let beta = beta_couplings(&c).unwrap();
            let hand = hand_beta_0_to_4(lambda, &a);
            for n in 0..=4 {
                assert_abs_diff_eq!(beta[n], hand[n], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn even_sector_is_structurally_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut a = vec![0.0; 11];
            a[0] = rng.gen_range(-1.0..1.0);
            a[2] = rng.gen_range(-0.5..3.0);
            for n in [4, 6, 8, 10] {
                a[n] = rng.gen_range(-1.0..1.0);
            }
            let c = CouplingVector::new(1.3, a).unwrap();
            let beta = beta_couplings(&c).unwrap();
            for n in [1, 3, 5, 7, 9] {
                assert_eq!(beta[n], 0.0, "odd beta_{n} must be exactly zero");
            }
        }
    }

    #[test]
    fn pole_is_reported_not_evaluated() {
        let c = CouplingVector::new(1.0, vec![0.0, 0.0, -1.0, 0.0, 0.5]).unwrap();
        match beta_couplings(&c) {
            Err(Error::MassPole { lambda }) => assert_eq!(lambda, 1.0),
            other => panic!("expected mass pole, got {other:?}"),
        }
    }

    #[test]
    fn harmonic_coupling_flow_yields_half_m_with_frozen_mass() {
        let cfg = FlowConfig::default();
        let c0 = CouplingVector::new(cfg.lambda0, vec![0.0, 0.0, 1.0]).unwrap();
        let traj = evolve_couplings(&c0, &cfg).unwrap();
        assert!(traj.termination.is_completed());
        let last = traj.snapshots.last().unwrap();
        // At N=2 the curvature series is constant, so a_2 never moves: the
        // no-mass-running statement holds bit-exactly.
        assert_eq!(last.a[2], 1.0);
        assert_eq!(last.lambda, cfg.lambda_ir);
        // Raw window value misses the tails...
        assert!((last.a[0] - 0.5).abs() > 1e-3);
        // ...and the completed value nails them (tails are exact for a
        // non-running mass; residual is integrator tolerance).
        let eff = traj.effective.as_ref().unwrap();
        assert_abs_diff_eq!(eff.a[0], 0.5, epsilon = 1e-6);
        assert_eq!(eff.a[2], 1.0);
        assert_eq!(eff.lambda, 0.0);
    }

    #[test]
    fn strong_coupling_double_well_completes() {
        let cfg = FlowConfig::default();
        let c0 =
            CouplingVector::from_polynomial(&potentials::double_well(0.2), 12, cfg.lambda0).unwrap();
        let traj = evolve_couplings(&c0, &cfg).unwrap();
        assert!(traj.termination.is_completed(), "termination: {:?}", traj.termination);
        let eff = traj.final_couplings();
        // The flow convexifies the origin: curvature ends positive.
        assert!(eff.a[2] > 0.0, "a_2 at the end: {}", eff.a[2]);
    }

    #[test]
    fn weak_coupling_double_well_hits_the_mass_pole() {
        let cfg = FlowConfig::default();
        let c0 =
            CouplingVector::from_polynomial(&potentials::double_well(0.02), 10, cfg.lambda0).unwrap();
        let traj = evolve_couplings(&c0, &cfg).unwrap();
        match traj.termination {
            Termination::MassPole { lambda } => {
                assert!(lambda > 0.0 && lambda < 5.0, "pole at lambda = {lambda}");
            }
            ref other => panic!("expected mass pole, got {other:?}"),
        }
        assert!(traj.effective.is_none());
        // Partial trajectory is still returned.
        assert!(traj.snapshots.len() >= 2);
        assert!(traj.snapshots.last().unwrap().lambda < cfg.lambda0);
    }

    #[test]
    fn mismatched_start_scale_is_rejected() {
        let cfg = FlowConfig::default();
        let c0 = CouplingVector::new(50.0, vec![0.0, 0.0, 1.0]).unwrap();
        assert!(evolve_couplings(&c0, &cfg).is_err());
    }
}
