//! Supersymmetric-breaking study: ground energy of the SUSY partner
//! potential over the superpotential coupling `g`.  Each point reports the
//! grid flow (the un-truncated solver), the truncated coupling flow at the
//! configured order, the oracle, the valley estimate, and the perturbative
//! ground energy — the last is zero at every order, which is why a positive
//! flowed energy is a purely non-perturbative signal.

use std::path::Path;

use anyhow::Result;
use serde_json::Value;

use nprg::coupling_flow::{evolve_couplings, CouplingVector};
use nprg::grid::Grid1D;
use nprg::grid_flow::evolve_grid;
use nprg::observables::{extract_from_coupling_trajectory, extract_from_grid_trajectory};
use nprg::oracle::solve_auto;
use nprg::parallel::par_map;
use nprg::potentials::{shift_to_minimum, SusyPotentialW};
use nprg::references::{susy_perturbative_energy, valley_estimate};

use crate::config::SusyStudy;
use crate::manifest::{
    fmt, fmt_opt, status_of_error, status_of_termination, Axis, PointReport, RunWriter,
};
use crate::studies::{expected, sorted_axis, timed};

struct SusyRow {
    grid_e0: Option<f64>,
    grid_status: String,
    coupling_e0: Option<f64>,
    coupling_status: String,
    oracle_e0: Option<f64>,
    /// Empty at g = 0, where the valley saddle degenerates.
    valley_e0: Option<f64>,
    valley_valid: bool,
    perturbation_e0: f64,
}

impl SusyRow {
    /// A point counts as delivered when either solver reached the infrared.
    fn status(&self) -> String {
        if self.grid_status == "completed" || self.coupling_status == "completed" {
            "completed".into()
        } else {
            self.grid_status.clone()
        }
    }
}

pub fn run(cfg: &SusyStudy, echo: Value, out: &Path) -> Result<i32> {
    let start = std::time::Instant::now();
    let values = sorted_axis(&cfg.g_values);
    let results = par_map(values.clone(), |g| timed(|| point(cfg, g)));

    let mut csv = String::from(
        "g,grid_e0,grid_status,coupling_e0,coupling_status,oracle_e0,\
         valley_e0,valley_valid,perturbation_e0\n",
    );
    let mut points = Vec::with_capacity(values.len());
    for (&g, (row, seconds)) in values.iter().zip(&results) {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(g),
            fmt_opt(row.grid_e0),
            row.grid_status,
            fmt_opt(row.coupling_e0),
            row.coupling_status,
            fmt_opt(row.oracle_e0),
            fmt_opt(row.valley_e0),
            row.valley_valid,
            fmt(row.perturbation_e0),
        ));
        points.push(PointReport {
            value: Some(g),
            label: format!("g={}", fmt(g)),
            status: row.status(),
            expected_failure: expected(g, &cfg.expected_failures),
            seconds: *seconds,
        });
    }

    let mut writer = RunWriter::new(out)?;
    writer.write("susy.csv", &csv, "primary")?;
    let axis = Axis { name: "g".into(), values };
    writer.finish("susy", echo, Some(axis), points, start.elapsed().as_secs_f64())
}

fn point(cfg: &SusyStudy, g: f64) -> SusyRow {
    let p = SusyPotentialW::new(g).partner_plus();
    let valley = (g > 0.0).then(|| valley_estimate(g));

    let (grid_e0, grid_status) = grid_energy(cfg, &p);
    let (coupling_e0, coupling_status) = coupling_energy(cfg, &p);
    let oracle_e0 = solve_auto(&p, 1).ok().map(|sol| sol.energies[0]);

    SusyRow {
        grid_e0,
        grid_status,
        coupling_e0,
        coupling_status,
        oracle_e0,
        valley_e0: valley.as_ref().map(|v| v.value),
        valley_valid: valley.as_ref().is_some_and(|v| v.validity_note.is_none()),
        perturbation_e0: susy_perturbative_energy(0, g),
    }
}

fn grid_energy(cfg: &SusyStudy, p: &nprg::potentials::Polynomial1D) -> (Option<f64>, String) {
    let grid = match Grid1D::new(-cfg.x_max, cfg.x_max, cfg.points) {
        Ok(grid) => grid,
        Err(e) => return (None, status_of_error(&e)),
    };
    let traj = match evolve_grid(p, &grid, &cfg.flow) {
        Ok(t) => t,
        Err(e) => return (None, status_of_error(&e)),
    };
    match extract_from_grid_trajectory(&traj) {
        Ok(set) => (Some(set.e0), status_of_termination(&traj.termination)),
        Err(_) if !traj.termination.is_completed() => {
            (None, status_of_termination(&traj.termination))
        }
        Err(e) => (None, status_of_error(&e)),
    }
}

fn coupling_energy(cfg: &SusyStudy, p: &nprg::potentials::Polynomial1D) -> (Option<f64>, String) {
    let (x0, expanded) = if cfg.shift_to_minimum {
        match shift_to_minimum(p) {
            Ok(pair) => pair,
            Err(e) => return (None, status_of_error(&e)),
        }
    } else {
        (0.0, p.clone())
    };
    let c0 = match CouplingVector::from_polynomial(&expanded, cfg.order, cfg.flow.lambda0) {
        Ok(c) => c,
        Err(e) => return (None, status_of_error(&e)),
    };
    let traj = match evolve_couplings(&c0, &cfg.flow) {
        Ok(t) => t,
        Err(e) => return (None, status_of_error(&e)),
    };
    match extract_from_coupling_trajectory(&traj, x0) {
        Ok(set) => (Some(set.e0), status_of_termination(&traj.termination)),
        Err(_) if !traj.termination.is_completed() => {
            (None, status_of_termination(&traj.termination))
        }
        Err(e) => (None, status_of_error(&e)),
    }
}
