//! Fixed points of the dimensionless flow and their linearization.
//!
//! Roots of `dâ/dt = 0` are searched in the even coupling sector
//! `(â_2, â_4, ..., â_N)` — the vacuum component `â_0` decouples (no beta
//! depends on it) and is solved passively afterwards. A damped Newton
//! iteration runs from a lattice of seeds plus the origin; converged roots
//! are deduplicated and returned with the eigenvalues of the numerically
//! linearized flow, whose positive-real-part count (relevant directions)
//! classifies each point. The Gaussian fixed point `â = 0` always exists;
//! finite truncation adds a spurious attractive partner responsible for the
//! false broken phase.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dimensionless::{beta_dimensionless, DimlessCouplingVector};
use crate::parallel::par_map;
use crate::FLOW_PREFACTOR;

/// Rectangle of Newton seeds in the `(â_2, â_4)` plane; higher even
/// couplings are seeded at zero.
#[derive(Debug, Clone)]
pub struct SearchBox {
    pub a2: (f64, f64),
    pub a4: (f64, f64),
    /// Seeds per axis (the lattice has `per_axis²` points).
    pub per_axis: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self { a2: (-0.9, 0.6), a4: (0.1, 5.0), per_axis: 7 }
    }
}

/// A root of the dimensionless flow with its linearization.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPoint {
    /// Full coupling vector `â_0..â_N` (odd components zero, `â_0` solved
    /// from `â_2`).
    pub ahat: Vec<f64>,
    /// Eigenvalues `(re, im)` of the even-sector Jacobian of `dâ/dt`,
    /// sorted by descending real part.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Number of relevant (expanding) directions.
    pub relevant: usize,
}

impl FixedPoint {
    /// True for the trivial root at the origin.
    pub fn is_gaussian(&self) -> bool {
        self.ahat.iter().all(|&v| v.abs() < 1e-8)
    }
}

/// Even-sector residual `F(v) = (dâ_n/dt)_{n=2,4,...}` with
/// `v = (â_2, â_4, ...)`. Returns `None` past the `â_2 = -1` pole.
fn residual(order: usize, v: &[f64]) -> Option<Vec<f64>> {
    let mut ahat = vec![0.0; order + 1];
    for (k, &val) in v.iter().enumerate() {
        ahat[2 * (k + 1)] = val;
    }
    let d = DimlessCouplingVector { t: 0.0, ahat };
    let full = beta_dimensionless(&d).ok()?;
    Some((1..=v.len()).map(|k| full[2 * k]).collect())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Central-difference Jacobian of the even-sector residual.
fn jacobian(order: usize, v: &[f64]) -> Option<DMatrix<f64>> {
    let m = v.len();
    let mut j = DMatrix::zeros(m, m);
    for col in 0..m {
        let h = 1e-6 * v[col].abs().max(1.0);
        let mut vp = v.to_vec();
        let mut vm = v.to_vec();
        vp[col] += h;
        vm[col] -= h;
        let fp = residual(order, &vp)?;
        let fm = residual(order, &vm)?;
        for row in 0..m {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Some(j)
}

/// Damped Newton from one seed; `Some(even-sector root)` on convergence.
fn newton(order: usize, seed: &[f64]) -> Option<Vec<f64>> {
    let mut v = seed.to_vec();
    let mut f = residual(order, &v)?;
    for _ in 0..60 {
        if inf_norm(&f) < 1e-12 {
            return Some(v);
        }
        let j = jacobian(order, &v)?;
        let delta = j.lu().solve(&DVector::from_column_slice(&f))?;
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> =
                v.iter().zip(delta.iter()).map(|(x, d)| x - alpha * d).collect();
            // Stay on this side of the pole and insist on residual decrease.
            if 1.0 + trial[0] > 1e-9 {
                if let Some(ft) = residual(order, &trial) {
                    if inf_norm(&ft) < (1.0 - 0.25 * alpha) * inf_norm(&f) || inf_norm(&ft) < 1e-12
                    {
                        v = trial;
                        f = ft;
                        break;
                    }
                }
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                return None;
            }
        }
    }
    if inf_norm(&f) < 1e-12 {
        Some(v)
    } else {
        None
    }
}

/// Searches the box for fixed points at truncation order `order` (even,
/// ≥ 4). Roots are deduplicated at 1e-8 in the even-sector ∞-norm and
/// sorted by distance from the origin, so the Gaussian point comes first.
pub fn find_fixed_points(order: usize, search: &SearchBox) -> Vec<FixedPoint> {
    assert!(order >= 4 && order % 2 == 0, "even-sector search needs even order >= 4");
    let m = order / 2;
    let n = search.per_axis.max(2);
    let mut seeds: Vec<Vec<f64>> = vec![vec![0.0; m]];
    for i in 0..n {
        let a2 = search.a2.0 + (search.a2.1 - search.a2.0) * i as f64 / (n - 1) as f64;
        for jj in 0..n {
            let a4 = search.a4.0 + (search.a4.1 - search.a4.0) * jj as f64 / (n - 1) as f64;
            let mut s = vec![0.0; m];
            s[0] = a2;
            s[1] = a4;
            seeds.push(s);
        }
    }

    let roots = par_map(seeds, |s| newton(order, &s));
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for root in roots.into_iter().flatten() {
        let dup = distinct.iter().any(|r| {
            r.iter().zip(&root).fold(0.0f64, |mx, (a, b)| mx.max((a - b).abs())) < 1e-8
        });
        if !dup {
            distinct.push(root);
        }
    }
    distinct.sort_by(|a, b| inf_norm(a).partial_cmp(&inf_norm(b)).unwrap());

    distinct
        .into_iter()
        .filter_map(|v| {
            let j = jacobian(order, &v)?;
            let eig = j.complex_eigenvalues();
            let mut eigenvalues: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
            eigenvalues
                .sort_by(|a, b| (b.0, b.1).partial_cmp(&(a.0, a.1)).unwrap());
            let relevant = eigenvalues.iter().filter(|(re, _)| *re > 1e-8).count();
            let mut ahat = vec![0.0; order + 1];
            for (k, &val) in v.iter().enumerate() {
                ahat[2 * (k + 1)] = val;
            }
            // dâ_0/dt = â_0 + (1/2π)·ln(1 + â_2) = 0.
            ahat[0] = -FLOW_PREFACTOR * (1.0 + v[0]).ln();
            Some(FixedPoint { ahat, eigenvalues, relevant })
        })
        .collect()
}
