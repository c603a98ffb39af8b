//! Nonperturbative renormalization-group flows for quantum-mechanical
//! effective potentials.
//!
//! The crate integrates the sharp-cutoff local-potential flow
//!
//! ```text
//! Λ ∂V_Λ(x)/∂Λ = -(Λ/2π) · ln(1 + V_Λ''(x)/Λ²)
//! ```
//!
//! from a bare potential at Λ₀ down to an infrared scale, and turns the
//! resulting effective potential into spectral observables (ground-state
//! energy, gap, moments). Two independent representations of `V_Λ` are
//! evolved:
//!
//! - [`grid_flow`]: `V` sampled on a uniform grid, second derivative by
//!   finite differences (method of lines, no truncation in the potential);
//! - [`coupling_flow`]: `V` as a Taylor polynomial, the logarithm expanded
//!   by truncated power-series arithmetic so one generator produces the
//!   coupled ODEs at any truncation order.
//!
//! Everything the flows claim is cross-checked against [`oracle`], a direct
//! finite-difference Schrödinger eigensolver, and against the closed-form
//! estimates in [`references`] (perturbative series, instanton gap,
//! supersymmetric valley formula).

pub mod coupling_flow;
pub mod dimensionless;
pub mod error;
pub mod fixed_points;
pub mod grid;
pub mod grid_flow;
pub mod observables;
pub mod ode;
pub mod oracle;
pub mod parallel;
pub mod potentials;
pub mod references;
pub mod series;
pub mod tails;
pub mod two_field;

pub use error::{Error, Result};

/// One-loop angular prefactor of the sharp-cutoff flow in one dimension:
/// the right-hand side carries `A₁/2 = 1/2π` per unit `Λ`.
pub const FLOW_PREFACTOR: f64 = 1.0 / (2.0 * std::f64::consts::PI);
