//! Physical observables extracted from an infrared effective potential.
//!
//! Whatever solver produced `V_eff` (grid snapshot or coupling vector), the
//! extraction is the same local analysis at the vacuum `⟨x⟩ = argmin V`:
//!
//! ```text
//! E₀ = V(⟨x⟩)            ΔE = m_eff = √V''(⟨x⟩)       λ_eff = V''''(⟨x⟩)
//! M₂ = 1/(2m_eff)        M₄ = 3M₂² - λ_eff/(32m_eff⁵)
//! ```
//!
//! Grid-side derivatives come from a least-squares quartic fit over a
//! symmetric 11-node window centered on the minimal node (fourth finite
//! differences of flowed data amplify noise; the fourth derivative is
//! needed for `λ_eff`). Coupling-side derivatives are analytic. Extractions
//! refuse potentials whose vacuum sits against the domain boundary and
//! flows that stopped while the cutoff was still comparable to the mass
//! scale.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coupling_flow::{CouplingTrajectory, CouplingVector};
use crate::error::{Error, Result};
use crate::grid::GridPotential;
use crate::grid_flow::FlowTrajectory;
use crate::series::TruncatedSeries2;

/// An infrared effective potential with a uniform local-derivative
/// interface over both solver outputs.
#[derive(Debug, Clone)]
pub enum EffectivePotential {
    /// A grid snapshot (typically the tail-completed final potential).
    Grid(GridPotential),
    /// A coupling vector expanded around `expansion_point` (nonzero for
    /// shift-to-minimum flows): `V(x) = Σ a_n (x - expansion_point)ⁿ/n!`.
    Couplings { couplings: CouplingVector, expansion_point: f64 },
}

/// The extracted observable record.
///
/// `m2`/`m4` are `None` exactly when `m_eff = 0` (massless effective
/// potential: the moments are undefined).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableSet {
    /// Vacuum expectation value `⟨x⟩` (also the first moment `M₁`).
    pub x_vev: f64,
    /// Ground-state energy `E₀ = V_eff(⟨x⟩)`.
    pub e0: f64,
    /// Energy gap `ΔE = √V''(⟨x⟩)`.
    pub m_eff: f64,
    /// Effective quartic coupling `V''''(⟨x⟩)`.
    pub lambda_eff: f64,
    pub m1: f64,
    pub m2: Option<f64>,
    pub m4: Option<f64>,
}

impl ObservableSet {
    /// Connected part of the fourth moment, `M₄ - 3M₂²`.
    pub fn m4_connected(&self) -> Option<f64> {
        match (self.m4, self.m2) {
            (Some(m4), Some(m2)) => Some(m4 - 3.0 * m2 * m2),
            _ => None,
        }
    }

    /// Header for the CSV row form.
    pub const CSV_HEADER: &'static str = "x_vev,e0,m_eff,lambda_eff,m1,m2,m4";

    /// One CSV row, full precision, empty cells for undefined moments.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            self.x_vev,
            self.e0,
            self.m_eff,
            self.lambda_eff,
            self.m1,
            opt(self.m2),
            opt(self.m4)
        )
    }
}

/// Half-width of the grid fit window in nodes.
const FIT_HALF: usize = 5;

/// Least-squares quartic fit of 11 samples at scaled abscissae
/// `v = -1, -0.8, ..., 1`; returns the coefficients of `Σ β_k v^k`.
fn quartic_fit(values: &[f64]) -> [f64; 5] {
    debug_assert_eq!(values.len(), 2 * FIT_HALF + 1);
    let vs: Vec<f64> = (0..values.len())
        .map(|i| (i as f64 - FIT_HALF as f64) / FIT_HALF as f64)
        .collect();
    let mut a = DMatrix::zeros(5, 5);
    let mut rhs = DVector::zeros(5);
    for (i, &v) in vs.iter().enumerate() {
        let mut pow = [0.0; 5];
        let mut p = 1.0;
        for entry in &mut pow {
            *entry = p;
            p *= v;
        }
        for j in 0..5 {
            rhs[j] += pow[j] * values[i];
            for k in 0..5 {
                a[(j, k)] += pow[j] * pow[k];
            }
        }
    }
    let beta = a.lu().solve(&rhs).expect("fixed quartic design matrix is nonsingular");
    [beta[0], beta[1], beta[2], beta[3], beta[4]]
}

/// Quartic-fit description of the potential near its minimal node:
/// `(center x, scale s, β)` with `V(x) ≈ Σ β_k ((x-center)/s)^k`.
struct LocalFit {
    center: f64,
    scale: f64,
    beta: [f64; 5],
}

impl LocalFit {
    fn value(&self, x: f64) -> f64 {
        let v = (x - self.center) / self.scale;
        self.beta.iter().rev().fold(0.0, |acc, b| acc * v + b)
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let v = (x - self.center) / self.scale;
        (2.0 * self.beta[2] + 6.0 * self.beta[3] * v + 12.0 * self.beta[4] * v * v)
            / (self.scale * self.scale)
    }

    fn fourth_derivative(&self) -> f64 {
        24.0 * self.beta[4] / self.scale.powi(4)
    }

    /// Newton refinement of the minimum inside the window (`|v| ≤ 0.5`).
    fn refine_minimum(&self) -> f64 {
        let d1 = |v: f64| {
            self.beta[1]
                + 2.0 * self.beta[2] * v
                + 3.0 * self.beta[3] * v * v
                + 4.0 * self.beta[4] * v * v * v
        };
        let d2 = |v: f64| 2.0 * self.beta[2] + 6.0 * self.beta[3] * v + 12.0 * self.beta[4] * v * v;
        let mut v = 0.0f64;
        for _ in 0..50 {
            let slope = d1(v);
            let curv = d2(v);
            if curv <= 0.0 {
                break;
            }
            let step = slope / curv;
            v = (v - step).clamp(-0.5, 0.5);
            if step.abs() < 1e-15 {
                break;
            }
        }
        self.center + self.scale * v
    }
}

fn grid_local_fit(gp: &GridPotential) -> Result<LocalFit> {
    let n = gp.values.len();
    let mut imin = 0;
    for (i, &v) in gp.values.iter().enumerate() {
        if v < gp.values[imin] {
            imin = i;
        }
    }
    if imin < FIT_HALF || imin + FIT_HALF >= n {
        return Err(Error::DomainTooSmall(format!(
            "potential minimum at node {imin} of {n} leaves no fit window; widen the grid"
        )));
    }
    let window = &gp.values[imin - FIT_HALF..=imin + FIT_HALF];
    Ok(LocalFit {
        center: gp.grid.x(imin),
        scale: FIT_HALF as f64 * gp.grid.h(),
        beta: quartic_fit(window),
    })
}

/// The vacuum of a coupling-vector potential: among the critical points
/// with positive curvature, the one closest to the expansion point (the
/// truncated series is only trusted near it).
fn couplings_vacuum(c: &CouplingVector) -> Result<f64> {
    let p = c.to_polynomial();
    let minima: Vec<f64> = p
        .critical_points()
        .into_iter()
        .filter(|&x| p.second_derivative_at(x) > 0.0)
        .collect();
    minima
        .into_iter()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .ok_or_else(|| Error::Extraction("no local minimum in the truncated potential".into()))
}

impl EffectivePotential {
    /// Global minimizer of the potential (grid: minimal node refined by the
    /// local quartic fit; couplings: nearest positive-curvature critical
    /// point). Fails with a domain error when the minimum sits against the
    /// grid boundary.
    pub fn locate_vacuum(&self) -> Result<f64> {
        match self {
            EffectivePotential::Grid(gp) => Ok(grid_local_fit(gp)?.refine_minimum()),
            EffectivePotential::Couplings { couplings, expansion_point } => {
                Ok(expansion_point + couplings_vacuum(couplings)?)
            }
        }
    }

    /// Extracts the full observable record at the vacuum.
    pub fn extract_observables(&self) -> Result<ObservableSet> {
        let (x_vev, e0, v2, v4) = match self {
            EffectivePotential::Grid(gp) => {
                let fit = grid_local_fit(gp)?;
                let x = fit.refine_minimum();
                (x, fit.value(x), fit.second_derivative(x), fit.fourth_derivative())
            }
            EffectivePotential::Couplings { couplings, expansion_point } => {
                let phi = couplings_vacuum(couplings)?;
                let p = couplings.to_polynomial();
                let v2 = p.second_derivative_at(phi);
                let v4 = p.derivative().derivative().derivative().derivative().value(phi);
                (expansion_point + phi, p.value(phi), v2, v4)
            }
        };
        if v2 < -1e-10 {
            return Err(Error::Extraction(format!(
                "negative curvature {v2:.3e} at the located vacuum"
            )));
        }
        let m_eff = v2.max(0.0).sqrt();
        let (m2, m4) = if m_eff > 0.0 {
            let m2 = 1.0 / (2.0 * m_eff);
            // Tree-level connected four-point at equal times: the quartic
            // vertex of the effective action is -V_eff'''' and each leg
            // carries a propagator exp(-m|t|)/(2m), so
            //   <x^4>_c = -V'''' ∫dt G(t)^4 = -V''''/(32 m^5).
            // The textbook form -3g/(4m^5) is the same number with the 4!
            // absorbed into the x^4 coefficient g = V''''/24.
            let m4_connected = -v4 / (32.0 * m_eff.powi(5));
            (Some(m2), Some(m4_connected + 3.0 * m2 * m2))
        } else {
            (None, None)
        };
        Ok(ObservableSet { x_vev, e0, m_eff, lambda_eff: v4, m1: x_vev, m2, m4 })
    }
}

/// Whether a flow stopped at `lambda_stop` is deep enough below the mass
/// scale for extraction to make sense.
fn check_frozen(lambda_stop: f64, m_eff: f64) -> Result<()> {
    if lambda_stop < 0.05 * m_eff {
        Ok(())
    } else {
        Err(Error::FlowIncomplete { lambda_stop })
    }
}

/// Extracts observables from a grid-flow trajectory.
///
/// Completed flows use the tail-completed effective potential when present.
/// Early-terminated flows are accepted only if they froze out (the stopping
/// scale is below 5% of the extracted mass); otherwise the extraction is
/// refused as incomplete.
pub fn extract_from_grid_trajectory(traj: &FlowTrajectory) -> Result<ObservableSet> {
    let last = traj.final_potential();
    let set = EffectivePotential::Grid(last.clone()).extract_observables()?;
    if !traj.termination.is_completed() {
        check_frozen(last.lambda, set.m_eff)?;
    }
    Ok(set)
}

/// Extracts observables from a coupling-flow trajectory (see
/// [`extract_from_grid_trajectory`] for the completeness policy).
pub fn extract_from_coupling_trajectory(
    traj: &CouplingTrajectory,
    expansion_point: f64,
) -> Result<ObservableSet> {
    let last = traj.final_couplings();
    let set = EffectivePotential::Couplings { couplings: last.clone(), expansion_point }
        .extract_observables()?;
    if !traj.termination.is_completed() {
        check_frozen(last.lambda, set.m_eff)?;
    }
    Ok(set)
}

/// Energy gap of a two-field effective potential: `√(∂²V/∂x₂²)` at the
/// joint vacuum (Newton from the origin; the exchange-symmetric vacuum has
/// a diagonal Hessian there).
pub fn two_field_gap(v: &TruncatedSeriesPotential<'_>) -> Result<f64> {
    let (x1, x2) = v.locate_vacuum()?;
    let h22 = v.series.d2().d2().eval(x1, x2);
    let h11 = v.series.d1().d1().eval(x1, x2);
    let h12 = v.series.d1().d2().eval(x1, x2);
    // Positive-semidefinite Hessian check (up to numerical slack).
    let tr = h11 + h22;
    let det = h11 * h22 - h12 * h12;
    if det < -1e-10 || tr < -1e-10 {
        return Err(Error::Extraction(format!(
            "saddle at candidate vacuum: Hessian trace {tr:.3e}, det {det:.3e}"
        )));
    }
    if h22 < 0.0 {
        return Err(Error::Extraction(format!("negative x2-sector curvature {h22:.3e}")));
    }
    Ok(h22.sqrt())
}

/// A borrowed two-field potential with vacuum search.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedSeriesPotential<'a> {
    pub series: &'a TruncatedSeries2,
}

impl TruncatedSeriesPotential<'_> {
    /// Newton search for the joint stationary point nearest the origin.
    pub fn locate_vacuum(&self) -> Result<(f64, f64)> {
        let g1 = self.series.d1();
        let g2 = self.series.d2();
        let h11 = g1.d1();
        let h12 = g1.d2();
        let h22 = g2.d2();
        let (mut x1, mut x2) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            let f1 = g1.eval(x1, x2);
            let f2 = g2.eval(x1, x2);
            if f1.abs().max(f2.abs()) < 1e-13 {
                return Ok((x1, x2));
            }
            let a = h11.eval(x1, x2);
            let b = h12.eval(x1, x2);
            let d = h22.eval(x1, x2);
            let det = a * d - b * b;
            if det.abs() < 1e-300 {
                break;
            }
            x1 -= (d * f1 - b * f2) / det;
            x2 -= (a * f2 - b * f1) / det;
            if x1.abs() > 1e3 || x2.abs() > 1e3 {
                break;
            }
        }
        Err(Error::Extraction("two-field stationary point search did not converge".into()))
    }
}
