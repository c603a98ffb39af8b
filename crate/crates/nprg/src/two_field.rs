//! Coupling flow for two-variable potentials.
//!
//! The one-variable log of `1 + V''/Λ²` generalizes to the log determinant
//! of the fluctuation matrix built from the 2×2 series Hessian `H_ab`:
//!
//! ```text
//! Λ ∂V/∂Λ = -(Λ/2π) · ln det(I + H/Λ²)
//!         = -(Λ/2π) · ln[(1 + H̃₁₁)(1 + H̃₂₂) - H̃₁₂²] ,   H̃ = H/Λ²
//! ```
//!
//! evaluated by truncated series arithmetic at fixed total degree. The
//! determinant is hard-coded 2×2 (two particles). Snapshot scheduling,
//! termination reporting, and the two-sided boundary completion mirror the
//! one-variable coupling flow; the completion tails are Gauss-Legendre
//! quadratures of the log determinant because no closed form survives the
//! matrix structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_flow::{FlowConfig, Termination};
use crate::ode::{self, StopReason};
use crate::series::TruncatedSeries2;
use crate::tails;
use crate::FLOW_PREFACTOR;

/// One recorded point of a two-field flow.
#[derive(Debug, Clone)]
pub struct TwoFieldSnapshot {
    pub lambda: f64,
    pub v: TruncatedSeries2,
}

/// The recorded output of a two-field flow.
#[derive(Debug, Clone)]
pub struct TwoFieldTrajectory {
    /// Initial potential, scheduled snapshots, and the final potential.
    pub snapshots: Vec<TwoFieldSnapshot>,
    pub termination: Termination,
    /// Tail-completed effective potential (completed flows only).
    pub effective: Option<TruncatedSeries2>,
    /// Accepted integrator steps.
    pub steps: usize,
}

impl TwoFieldTrajectory {
    /// The potential observables should read: the tail-completed effective
    /// potential when present, otherwise the last recorded snapshot.
    pub fn final_series(&self) -> &TruncatedSeries2 {
        self.effective.as_ref().unwrap_or_else(|| {
            &self.snapshots.last().expect("trajectory always holds the initial snapshot").v
        })
    }
}

/// The three distinct series Hessian entries `(∂₁₁V, ∂₁₂V, ∂₂₂V)`.
fn hessian(v: &TruncatedSeries2) -> (TruncatedSeries2, TruncatedSeries2, TruncatedSeries2) {
    let g1 = v.d1();
    (g1.d1(), g1.d2(), v.d2().d2())
}

/// `det(I + t·H) - 1` as a series, for `t = 1/Λ²` (or a quadrature scale).
fn det_arg_minus_one(
    h11: &TruncatedSeries2,
    h12: &TruncatedSeries2,
    h22: &TruncatedSeries2,
    t: f64,
) -> TruncatedSeries2 {
    let one = TruncatedSeries2::constant(1.0, h11.order());
    let a = one.add(&h11.scale(t));
    let b = one.add(&h22.scale(t));
    let h12t = h12.scale(t);
    a.mul(&b).sub(&h12t.mul(&h12t)).sub(&one)
}

fn beta_guarded(v: &TruncatedSeries2, lambda: f64, guard: f64) -> Result<TruncatedSeries2> {
    let (h11, h12, h22) = hessian(v);
    let t = 1.0 / (lambda * lambda);
    if 1.0 + t * h11.coeff(0, 0) <= guard {
        return Err(Error::MassPole { lambda });
    }
    let u = det_arg_minus_one(&h11, &h12, &h22, t);
    if 1.0 + u.coeff(0, 0) <= guard {
        return Err(Error::MassPole { lambda });
    }
    Ok(u.log1p()?.scale(-lambda * FLOW_PREFACTOR))
}

/// The two-field flow derivative `Λ ∂V/∂Λ` as a truncated series.
///
/// Fails with a mass-pole error when `1 + H̃₁₁` or the determinant has a
/// non-positive constant term (the expansion-point fluctuation matrix is
/// no longer positive).
pub fn beta_couplings_two_field(v: &TruncatedSeries2, lambda: f64) -> Result<TruncatedSeries2> {
    beta_guarded(v, lambda, 0.0)
}

fn pack(v: &TruncatedSeries2) -> Vec<f64> {
    v.monomials().map(|(_, _, c)| c).collect()
}

fn unpack(y: &[f64], order: usize) -> TruncatedSeries2 {
    let mut s = TruncatedSeries2::zero(order);
    let mut k = 0;
    for d in 0..=order {
        for i in 0..=d {
            s.set_coeff(i, d - i, y[k]);
            k += 1;
        }
    }
    debug_assert_eq!(k, y.len());
    s
}

/// Integrates the two-field flow of `v0` from `Λ₀` down to `Λ_IR` at the
/// truncation order carried by `v0` (pad the input to choose the order).
/// Termination and snapshot semantics match the one-variable coupling flow.
pub fn evolve_two_field(v0: &TruncatedSeries2, cfg: &FlowConfig) -> Result<TwoFieldTrajectory> {
    cfg.validate()?;
    if v0.order() < 2 {
        return Err(Error::InvalidConfig("two-field potential needs order >= 2".into()));
    }
    let lambda0 = cfg.lambda0;
    let order = v0.order();
    let guard = cfg.spinodal_guard;

    // Fail fast if the flow cannot even start.
    beta_guarded(v0, lambda0, guard)?;

    let mut snapshots = vec![TwoFieldSnapshot { lambda: lambda0, v: v0.clone() }];
    let checkpoints = cfg.checkpoints_in_s();

    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let lambda = lambda0 * (-s).exp();
        let beta = beta_guarded(&unpack(y, order), lambda, guard)?;
        // dV/ds = -Λ dV/dΛ.
        for (d, (_, _, b)) in dy.iter_mut().zip(beta.monomials()) {
            *d = -b;
        }
        Ok(())
    };

    let outcome = ode::integrate(
        rhs,
        0.0,
        pack(v0),
        &checkpoints,
        &cfg.step_control(),
        |s, y| {
            let lambda = lambda0 * (-s).exp();
            snapshots.push(TwoFieldSnapshot { lambda, v: unpack(y, order) });
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
            snapshots.push(TwoFieldSnapshot { lambda, v: unpack(&outcome.y, order) });
            match cause {
                Error::MassPole { lambda } => Termination::MassPole { lambda },
                Error::Spinodal { lambda, x } => Termination::Spinodal { lambda, x },
                other => return Err(other),
            }
        }
        StopReason::StepUnderflow { t } => {
            let lambda = lambda0 * (-t).exp();
            let v = unpack(&outcome.y, order);
            let det0 = 1.0 + det_arg_minus_one_at_origin(&v, lambda);
            snapshots.push(TwoFieldSnapshot { lambda, v });
            if det0 < 0.01 {
                Termination::MassPole { lambda }
            } else {
                Termination::StepUnderflow { lambda }
            }
        }
        StopReason::StepBudget { t } => {
            let lambda = lambda0 * (-t).exp();
            let v = unpack(&outcome.y, order);
            let det0 = 1.0 + det_arg_minus_one_at_origin(&v, lambda);
            snapshots.push(TwoFieldSnapshot { lambda, v });
            if det0 < 0.01 {
                Termination::MassPole { lambda }
            } else {
                Termination::StepBudget { lambda }
            }
        }
    };

    let effective = if termination.is_completed() && cfg.boundary_completion {
        Some(completed_two_field(v0, &snapshots.last().unwrap().v, cfg)?)
    } else {
        None
    };

    Ok(TwoFieldTrajectory { snapshots, termination, effective, steps: outcome.steps })
}

/// Constant term of `det(I + H/Λ²)` for the pole diagnosis.
fn det_arg_minus_one_at_origin(v: &TruncatedSeries2, lambda: f64) -> f64 {
    let (h11, h12, h22) = hessian(v);
    let t = 1.0 / (lambda * lambda);
    (1.0 + t * h11.coeff(0, 0)) * (1.0 + t * h22.coeff(0, 0))
        - (t * h12.coeff(0, 0)).powi(2)
        - 1.0
}

/// `ln` of a series with a positive constant term.
fn ln_series2(s: &TruncatedSeries2) -> Result<TruncatedSeries2> {
    let c0 = s.coeff(0, 0);
    if !(c0 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "series log argument has non-positive constant term {c0}"
        )));
    }
    let one = TruncatedSeries2::constant(1.0, s.order());
    let mut out = s.scale(1.0 / c0).sub(&one).log1p()?;
    let shifted = out.coeff(0, 0) + c0.ln();
    out.set_coeff(0, 0, shifted);
    Ok(out)
}

/// Attaches the two-sided boundary tails (same policy as one variable):
/// the ultraviolet tail integrates the bare log determinant over
/// `Λ ∈ (Λ₀, ∞)`; the infrared tail integrates the final one over
/// `(0, Λ_IR)` and is skipped unless the final expansion-point Hessian is
/// positive definite.
fn completed_two_field(
    v0: &TruncatedSeries2,
    last: &TruncatedSeries2,
    cfg: &FlowConfig,
) -> Result<TruncatedSeries2> {
    let order = v0.order();
    let (nodes, weights) = tails::quad_nodes();
    let mut out = last.clone();

    // Ultraviolet: Λ = Λ₀/v maps the tail onto v ∈ (0, 1); the integrand
    // ln det(I + H v²/Λ₀²) / v² is smooth at v = 0.
    let (h11, h12, h22) = hessian(v0);
    let mut uv = TruncatedSeries2::zero(order);
    for (&v, &w) in nodes.iter().zip(weights) {
        let t = (v / cfg.lambda0).powi(2);
        let ln = det_arg_minus_one(&h11, &h12, &h22, t).log1p()?;
        uv = uv.add(&ln.scale(w / (v * v)));
    }
    out = out.add(&uv.scale(FLOW_PREFACTOR * cfg.lambda0));

    // Infrared: split the Λ → 0 log singularity,
    //   ∫₀^ε ln det(I + H/Λ²) dΛ = ∫₀^ε ln[(Λ²+h₁₁)(Λ²+h₂₂) - h₁₂²] dΛ
    //                              - 4ε(ln ε - 1),
    // and substitute Λ = εu for the smooth remainder.
    let (h11, h12, h22) = hessian(last);
    let (a0, b0, c0) = (h11.coeff(0, 0), h22.coeff(0, 0), h12.coeff(0, 0));
    if a0 > 0.0 && b0 > 0.0 && a0 * b0 - c0 * c0 > 0.0 {
        let eps = cfg.lambda_ir;
        let one = TruncatedSeries2::constant(1.0, order);
        let mut ir = TruncatedSeries2::zero(order);
        for (&u, &w) in nodes.iter().zip(weights) {
            let l2 = (eps * u).powi(2);
            let p = h11
                .add(&one.scale(l2))
                .mul(&h22.add(&one.scale(l2)))
                .sub(&h12.mul(&h12));
            ir = ir.add(&ln_series2(&p)?.scale(w));
        }
        let mut tail = ir.scale(eps);
        let shifted = tail.coeff(0, 0) - 4.0 * eps * (eps.ln() - 1.0);
        tail.set_coeff(0, 0, shifted);
        out = out.add(&tail.scale(FLOW_PREFACTOR));
    }
    Ok(out)
}

/// Serializable coefficient table of a two-field series (`i,j,coeff` rows).
pub fn series_csv(v: &TruncatedSeries2) -> String {
    let mut s = String::from("i,j,coeff\n");
    for (i, j, c) in v.monomials() {
        s.push_str(&format!("{i},{j},{c:.16e}\n"));
    }
    s
}

/// Serializable two-field flow summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoFieldSummary {
    pub termination: Termination,
    pub steps: usize,
    pub lambda_stop: f64,
}

impl TwoFieldTrajectory {
    pub fn summary(&self) -> TwoFieldSummary {
        TwoFieldSummary {
            termination: self.termination.clone(),
            steps: self.steps,
            lambda_stop: self.snapshots.last().map(|s| s.lambda).unwrap_or(f64::NAN),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling_flow::{beta_couplings, factorials, CouplingVector};
    use crate::potentials::{two_particle_bare, Interaction, Polynomial1D};
    use crate::references::harmonic_a0_exact;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn separable(f: &[f64], g: &[f64], order: usize) -> TruncatedSeries2 {
        let mut v = TruncatedSeries2::zero(order);
        for (i, &c) in f.iter().enumerate() {
            v.set_coeff(i, 0, v.coeff(i, 0) + c);
        }
        for (j, &c) in g.iter().enumerate() {
            v.set_coeff(0, j, v.coeff(0, j) + c);
        }
        v
    }

    #[test]
    fn constant_hessian_has_closed_form_log_determinant() {
        // V = ½x₁² + ½x₂² + c·x₁x₂ at Λ = 1: det(I + H) = 4 - c².
        for c in [0.0, 0.5, -0.8] {
            let mut v = TruncatedSeries2::zero(4);
            v.set_coeff(2, 0, 0.5);
            v.set_coeff(0, 2, 0.5);
            v.set_coeff(1, 1, c);
            let beta = beta_couplings_two_field(&v, 1.0).unwrap();
            let expect = -FLOW_PREFACTOR * (4.0 - c * c).ln();
            assert_relative_eq!(beta.coeff(0, 0), expect, max_relative = 1e-14);
            for (i, j, b) in beta.monomials() {
                if i + j > 0 {
                    assert_eq!(b, 0.0, "nonconstant coefficient ({i},{j}) leaked");
                }
            }
        }
    }

    #[test]
    fn separable_beta_is_the_sum_of_one_field_betas() {
        let f = [0.2, 0.1, 0.5, 0.07, 0.03];
        let g = [0.0, -0.05, 0.4, 0.02, 0.06];
        let order = 8;
        let lambda = 1.3;
        let beta2 = beta_couplings_two_field(&separable(&f, &g, order), lambda).unwrap();

        let fact = factorials(order);
        let one_field = |coeffs: &[f64]| -> Vec<f64> {
            let c = CouplingVector::from_polynomial(
                &Polynomial1D::new(coeffs.to_vec()),
                order,
                lambda,
            )
            .unwrap();
            beta_couplings(&c).unwrap()
        };
        let bf = one_field(&f);
        let bg = one_field(&g);

        assert_abs_diff_eq!(beta2.coeff(0, 0), bf[0] + bg[0], epsilon = 1e-13);
        for n in 1..=order {
            assert_abs_diff_eq!(beta2.coeff(n, 0), bf[n] / fact[n], epsilon = 1e-13);
            assert_abs_diff_eq!(beta2.coeff(0, n), bg[n] / fact[n], epsilon = 1e-13);
        }
        for (i, j, b) in beta2.monomials() {
            if i >= 1 && j >= 1 {
                assert_abs_diff_eq!(b, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn reflection_symmetry_in_x1_is_structural() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let order = 10;
            let mut v = TruncatedSeries2::zero(order);
            for d in 0..=order {
                for i in (0..=d).step_by(2) {
                    v.set_coeff(i, d - i, rng.gen_range(-0.3..0.3));
                }
            }
            v.set_coeff(2, 0, 1.0 + v.coeff(2, 0).abs());
            v.set_coeff(0, 2, 1.0 + v.coeff(0, 2).abs());
            let beta = beta_couplings_two_field(&v, 1.7).unwrap();
            for (i, _, b) in beta.monomials() {
                if i % 2 == 1 {
                    assert_eq!(b, 0.0, "odd-in-x1 beta coefficient is not a structural zero");
                }
            }
        }
    }

    #[test]
    fn fluctuation_matrix_poles_are_rejected() {
        // Diagonal entry drives 1 + H̃₁₁ negative.
        let mut v = TruncatedSeries2::zero(4);
        v.set_coeff(2, 0, -1.5);
        v.set_coeff(0, 2, 0.5);
        assert!(matches!(
            beta_couplings_two_field(&v, 1.0),
            Err(Error::MassPole { .. })
        ));
        // Diagonal fine, but the off-diagonal kills the determinant.
        let mut v = TruncatedSeries2::zero(4);
        v.set_coeff(1, 1, 2.0);
        assert!(matches!(
            beta_couplings_two_field(&v, 1.0),
            Err(Error::MassPole { .. })
        ));
    }

    #[test]
    fn harmonic_two_field_flow_reproduces_two_half_masses() {
        let mut v0 = TruncatedSeries2::zero(4);
        v0.set_coeff(2, 0, 0.5);
        v0.set_coeff(0, 2, 0.5);
        let cfg = FlowConfig::default();
        let traj = evolve_two_field(&v0, &cfg).unwrap();
        assert!(traj.termination.is_completed());
        let eff = traj.effective.as_ref().unwrap();
        // Constant Hessian: the quadratic couplings never move.
        assert_eq!(eff.coeff(2, 0), 0.5);
        assert_eq!(eff.coeff(0, 2), 0.5);
        // Vacuum energy is two decoupled harmonic halves.
        let exact = 2.0 * harmonic_a0_exact(1.0, 0.0, f64::INFINITY);
        assert_abs_diff_eq!(eff.coeff(0, 0), exact, epsilon = 1e-6);
        assert_abs_diff_eq!(exact, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_particle_flow_completes_and_stays_exchange_symmetric() {
        // λ0 = 0.2 double wells, no interaction, in normal coordinates.
        let bare = two_particle_bare(0.2, &Interaction::Linear { c: 0.0 }, 8);
        let rotated = crate::potentials::rotate_to_normal_coordinates(&bare);
        let cfg = FlowConfig::default();
        let traj = evolve_two_field(&rotated, &cfg).unwrap();
        assert!(traj.termination.is_completed(), "got {:?}", traj.termination);
        let eff = traj.effective.as_ref().unwrap();
        for (i, j, c) in eff.monomials() {
            if i < j {
                assert_abs_diff_eq!(c, eff.coeff(j, i), epsilon = 1e-10);
            }
        }
        // The x₂-sector curvature has convexified.
        assert!(eff.coeff(0, 2) > 0.0);
    }

    #[test]
    fn snapshots_follow_the_schedule() {
        let mut v0 = TruncatedSeries2::zero(4);
        v0.set_coeff(2, 0, 0.5);
        v0.set_coeff(0, 2, 0.5);
        let cfg = FlowConfig {
            snapshot_lambdas: vec![10.0, 1.0],
            ..FlowConfig::default()
        };
        let traj = evolve_two_field(&v0, &cfg).unwrap();
        let lambdas: Vec<f64> = traj.snapshots.iter().map(|s| s.lambda).collect();
        assert_eq!(lambdas.len(), 4);
        assert_eq!(lambdas[0], cfg.lambda0);
        assert_abs_diff_eq!(lambdas[1], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lambdas[2], 1.0, epsilon = 1e-12);
        assert_eq!(lambdas[3], cfg.lambda_ir);
    }

    #[test]
    fn csv_table_lists_all_monomials() {
        let v = TruncatedSeries2::constant(1.0, 3);
        let csv = series_csv(&v);
        assert_eq!(csv.lines().count(), 1 + 10);
        assert!(csv.starts_with("i,j,coeff\n"));
    }
}
