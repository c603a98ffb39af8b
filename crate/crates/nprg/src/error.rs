//! Error type shared across the crate.
//!
//! Flow terminations (spinodal hits, mass poles) are *data*, not bugs: they
//! are reported through [`crate::grid_flow::Termination`] on trajectories.
//! The variants here cover precondition violations, guard trips inside a
//! single right-hand-side evaluation, and extraction refusals.

use thiserror::Error;

/// Crate-wide error enum.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration or argument violated a documented precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The grid-flow log argument `1 + V''(x)/Λ²` dropped to the guard at
    /// some node: the local mass squared reached the cutoff (spinodal
    /// instability).
    #[error("spinodal instability at lambda = {lambda:.6e}, x = {x:.6e}")]
    Spinodal { lambda: f64, x: f64 },

    /// The coupling-flow log argument `1 + a_2/Λ²` dropped to the guard:
    /// the running mass hit the cutoff pole.
    #[error("mass pole at lambda = {lambda:.6e}")]
    MassPole { lambda: f64 },

    /// Observable extraction was requested on a flow that stopped while the
    /// cutoff was still comparable to the physical mass scale.
    #[error("flow stopped at lambda = {lambda_stop:.6e}, too close to the physical scale for extraction")]
    FlowIncomplete { lambda_stop: f64 },

    /// A quantity leaked out of the computational domain (vacuum at a grid
    /// edge, wavefunction tail above threshold at the boundary).
    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    /// Two global minima of equal depth; the caller must pick a branch.
    #[error("degenerate global minima at x = {x_left:.12e} and x = {x_right:.12e}")]
    DegenerateMinima { x_left: f64, x_right: f64 },

    /// Observable extraction failed (no stationary point, negative
    /// curvature at the vacuum, saddle-point Hessian, ...).
    #[error("observable extraction failed: {0}")]
    Extraction(String),

    /// The spectral solver could not deliver validated eigenpairs.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
