//! Uniform spatial grids and grid-sampled potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::Polynomial1D;

/// Uniform one-dimensional grid on `[x_min, x_max]` with `n_points` nodes.
///
/// `n_points` is required to be odd so that symmetric domains contain `x = 0`
/// as a node; several parity-based checks and the default flow domain rely
/// on that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    /// Builds a grid. Requires `x_min < x_max`, at least 11 nodes (the
    /// observable extraction window), and an odd node count.
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidConfig(format!(
                "grid bounds must be finite with x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 11 || n_points % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "grid needs an odd node count >= 11, got {n_points}"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Default flow domain: `[-8, 8]` with 1601 nodes (spacing 0.01).
    pub fn default_flow_domain() -> Self {
        Self { x_min: -8.0, x_max: 8.0, n_points: 1601 }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Node spacing.
    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Coordinate of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        self.x_min + i as f64 * self.h()
    }

    /// All node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Grid with the same bounds and halved spacing (2n-1 nodes). Used for
    /// Richardson extrapolation in the spectral solver.
    pub fn refined(&self) -> Self {
        Self { x_min: self.x_min, x_max: self.x_max, n_points: 2 * self.n_points - 1 }
    }

    /// Grid widened symmetrically by `factor` about the domain center,
    /// keeping (approximately) the node spacing. The node count stays odd.
    pub fn widened(&self, factor: f64) -> Self {
        let mid = 0.5 * (self.x_min + self.x_max);
        let half = 0.5 * (self.x_max - self.x_min) * factor;
        let h = self.h();
        let mut n = (2.0 * half / h).round() as usize + 1;
        if n % 2 == 0 {
            n += 1;
        }
        Self { x_min: mid - half, x_max: mid + half, n_points: n }
    }
}

/// A potential sampled on a grid at a given cutoff scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPotential {
    pub grid: Grid1D,
    pub lambda: f64,
    pub values: Vec<f64>,
}

impl GridPotential {
    /// Samples a polynomial potential on `grid`, tagging it with the cutoff
    /// `lambda` it is meant to represent.
    pub fn sample(p: &Polynomial1D, grid: Grid1D, lambda: f64) -> Self {
        let values = (0..grid.n_points()).map(|i| p.value(grid.x(i))).collect();
        Self { grid, lambda, values }
    }

    /// Second derivative at every node: central three-point stencil in the
    /// interior, one-sided four-point stencils (same O(h²) accuracy) at the
    /// two boundary nodes.
    pub fn second_derivative(&self) -> Vec<f64> {
        second_derivative_of(&self.values, self.grid.h())
    }
}

/// Finite-difference second derivative of a sampled function (see
/// [`GridPotential::second_derivative`]).
pub fn second_derivative_of(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "second-derivative stencils need at least 4 nodes");
    let h2 = h * h;
    let mut out = vec![0.0; n];
    out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
    for i in 1..n - 1 {
        out[i] = (values[i - 1] - 2.0 * values[i] + values[i + 1]) / h2;
    }
    out[n - 1] = (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2;
    out
}
