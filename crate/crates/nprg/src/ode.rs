//! Adaptive embedded Runge-Kutta stepping (Dormand-Prince 5(4)).
//!
//! The flow right-hand sides can *fail* (the log argument hits its guard
//! near a spinodal or mass pole). A failed evaluation is treated like an
//! oversized step: the step is halved and retried, and if the step size
//! collapses the integration stops and reports the causing error together
//! with the last accepted state. Checkpoints are landed on exactly so
//! snapshot scales are bit-reproducible.

use crate::error::{Error, Result};

/// Step-size control parameters.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First attempted step.
    pub h_init: f64,
    /// Below this step size the integration gives up.
    pub h_min: f64,
    pub h_max: f64,
    /// Upper bound on step *attempts* (accepted or rejected). Pole-tracking
    /// flows can keep taking ever-smaller accepted steps without either
    /// finishing or underflowing; the budget turns that into a reported stop
    /// instead of an unbounded spin.
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            h_init: 1e-4,
            h_min: 1e-14,
            h_max: 0.25,
            max_steps: 200_000,
        }
    }
}

/// Why the integration returned.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    /// All checkpoints were reached.
    Completed,
    /// The right-hand side kept failing even at `h_min`; carries the error
    /// from the failing evaluation and the time of the last accepted state.
    RhsRejected { t: f64, cause: Error },
    /// Error control pushed the step below `h_min`.
    StepUnderflow { t: f64 },
    /// The attempt budget ran out before the final checkpoint.
    StepBudget { t: f64 },
}

/// Outcome of [`integrate`]: last accepted state and the reason for return.
#[derive(Debug, Clone)]
pub struct Integration {
    pub t: f64,
    pub y: Vec<f64>,
    pub reason: StopReason,
    /// Number of accepted steps (diagnostic).
    pub steps: usize,
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Error weights b - b* (5th minus embedded 4th order).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = f(t, y)` from `t0` through every checkpoint in
/// `checkpoints` (strictly increasing, all > `t0`), invoking `on_checkpoint`
/// with the state at each one. Returns early with a diagnostic if the
/// right-hand side keeps failing or the step size underflows.
pub fn integrate<F, C>(
    mut f: F,
    t0: f64,
    y0: Vec<f64>,
    checkpoints: &[f64],
    ctrl: &StepControl,
    mut on_checkpoint: C,
) -> Result<Integration>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    C: FnMut(f64, &[f64]),
{
    let dim = y0.len();
    if checkpoints.is_empty() {
        return Err(Error::InvalidConfig("integration needs at least one checkpoint".into()));
    }
    for w in checkpoints.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidConfig("checkpoints must be strictly increasing".into()));
        }
    }
    if checkpoints[0] <= t0 {
        return Err(Error::InvalidConfig("checkpoints must lie beyond the start time".into()));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = vec![0.0; dim];
    // The first derivative evaluation must succeed: a failure here means the
    // initial state already violates the guard, which the caller's
    // preconditions should have caught.
    f(t, &y, &mut k1)?;

    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut y_stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];

    let mut h = ctrl.h_init.min(ctrl.h_max);
    let mut steps = 0usize;
    let mut attempts = 0usize;
    let mut next_cp = 0usize;

    'outer: while next_cp < checkpoints.len() {
        attempts += 1;
        if attempts > ctrl.max_steps {
            return Ok(Integration { t, y, reason: StopReason::StepBudget { t }, steps });
        }
        let target = checkpoints[next_cp];
        // Land exactly on the checkpoint.
        let mut hit_cp = false;
        if t + h >= target {
            h = target - t;
            hit_cp = true;
        }
        if h < ctrl.h_min {
            // Degenerate only when a checkpoint is closer than h_min; take it.
            h = target - t;
            hit_cp = true;
        }

        // One attempted step of size h.
        let stage = |y: &[f64], k: &[&[f64]], coef: &[f64], h: f64, out: &mut [f64]| {
            for i in 0..y.len() {
                let mut acc = 0.0;
                for (kj, cj) in k.iter().zip(coef) {
                    acc += cj * kj[i];
                }
                out[i] = y[i] + h * acc;
            }
        };

        let attempt = (|| -> Result<f64> {
            stage(&y, &[&k1], &[A21], h, &mut y_stage);
            f(t + C2 * h, &y_stage, &mut k2)?;
            stage(&y, &[&k1, &k2], &[A31, A32], h, &mut y_stage);
            f(t + C3 * h, &y_stage, &mut k3)?;
            stage(&y, &[&k1, &k2, &k3], &[A41, A42, A43], h, &mut y_stage);
            f(t + C4 * h, &y_stage, &mut k4)?;
            stage(&y, &[&k1, &k2, &k3, &k4], &[A51, A52, A53, A54], h, &mut y_stage);
            f(t + C5 * h, &y_stage, &mut k5)?;
            stage(&y, &[&k1, &k2, &k3, &k4, &k5], &[A61, A62, A63, A64, A65], h, &mut y_stage);
            f(t + h, &y_stage, &mut k6)?;
            stage(&y, &[&k1, &k3, &k4, &k5, &k6], &[B1, B3, B4, B5, B6], h, &mut y_new);
            f(t + h, &y_new, &mut k7)?;

            // Weighted RMS of the embedded error estimate.
            let mut err_sq = 0.0;
            for i in 0..dim {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let scale = ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(y_new[i].abs());
                err_sq += (e / scale) * (e / scale);
            }
            Ok((err_sq / dim as f64).sqrt())
        })();

        match attempt {
            Err(cause) => {
                // Guard trip inside the step: shrink hard and retry.
                h *= 0.5;
                if h < ctrl.h_min {
                    return Ok(Integration { t, y, reason: StopReason::RhsRejected { t, cause }, steps });
                }
                continue 'outer;
            }
            Ok(err) => {
                if err <= 1.0 {
                    // Accept.
                    t += h;
                    std::mem::swap(&mut y, &mut y_new);
                    std::mem::swap(&mut k1, &mut k7); // FSAL
                    steps += 1;
                    if hit_cp {
                        t = target; // kill accumulated roundoff at the landing
                        on_checkpoint(t, &y);
                        next_cp += 1;
                    }
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).min(5.0) };
                    h = (h * grow).min(ctrl.h_max);
                } else {
                    let shrink = (0.9 * err.powf(-0.2)).max(0.2);
                    h *= shrink;
                    if h < ctrl.h_min {
                        return Ok(Integration { t, y, reason: StopReason::StepUnderflow { t }, steps });
                    }
                }
            }
        }
    }

    Ok(Integration { t, y, reason: StopReason::Completed, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_is_integrated_to_tolerance() {
        let ctrl = StepControl { rel_tol: 1e-10, abs_tol: 1e-12, ..Default::default() };
        let res = integrate(
            |_t, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            vec![1.0],
            &[1.0, 2.5, 5.0],
            &ctrl,
            |t, y| {
                assert_relative_eq!(y[0], (-t).exp(), max_relative = 1e-8);
            },
        )
        .unwrap();
        assert_eq!(res.reason, StopReason::Completed);
        assert_relative_eq!(res.y[0], (-5.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let ctrl = StepControl { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() };
        let res = integrate(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            vec![1.0, 0.0],
            &[20.0 * std::f64::consts::PI],
            &ctrl,
            |_, _| {},
        )
        .unwrap();
        assert_eq!(res.reason, StopReason::Completed);
        assert_relative_eq!(res.y[0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(res.y[1], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn checkpoints_are_landed_exactly() {
        let cps = [0.1, 0.3, 0.7, 1.0];
        let mut seen = Vec::new();
        integrate(
            |_t, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            vec![1.0],
            &cps,
            &StepControl::default(),
            |t, _| seen.push(t),
        )
        .unwrap();
        assert_eq!(seen, cps.to_vec());
    }

    #[test]
    fn rhs_failure_shrinks_then_reports() {
        // A benign slope with a hard failure wall at t = 0.5: only step
        // halving against the wall can stop this flow, so the stop reason
        // must be the rejected right-hand side (an unbounded slope would
        // instead race the error controller into a step underflow).
        let res = integrate(
            |t, _y, dy| {
                if t >= 0.5 {
                    return Err(Error::MassPole { lambda: t });
                }
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            vec![0.0],
            &[1.0],
            &StepControl::default(),
            |_, _| {},
        )
        .unwrap();
        match res.reason {
            StopReason::RhsRejected { t, cause: Error::MassPole { .. } } => {
                assert!(t < 0.5);
                assert!(t > 0.4, "should get close to the failure point, stopped at {t}");
            }
            other => panic!("expected RhsRejected, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_checkpoints() {
        let f = |_t: f64, _y: &[f64], dy: &mut [f64]| {
            dy[0] = 0.0;
            Ok(())
        };
        assert!(integrate(f, 0.0, vec![0.0], &[], &StepControl::default(), |_, _| {}).is_err());
        assert!(integrate(f, 0.0, vec![0.0], &[-1.0], &StepControl::default(), |_, _| {}).is_err());
        assert!(integrate(f, 0.0, vec![0.0], &[0.5, 0.5], &StepControl::default(), |_, _| {}).is_err());
    }
}
