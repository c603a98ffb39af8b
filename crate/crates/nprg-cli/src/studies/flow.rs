//! Single-flow study: one potential, one solver, full trajectory output.

use std::path::Path;

use anyhow::Result;
use serde_json::Value;

use nprg::coupling_flow::{evolve_couplings, CouplingTrajectory, CouplingVector};
use nprg::grid::Grid1D;
use nprg::grid_flow::{evolve_grid, potential_csv, trajectory_csv};
use nprg::observables::{
    extract_from_coupling_trajectory, extract_from_grid_trajectory, ObservableSet,
};
use nprg::potentials::shift_to_minimum;

use crate::config::FlowStudy;
use crate::manifest::{fmt, status_of_error, status_of_termination, PointReport, RunWriter};
use crate::studies::timed;

pub fn run(cfg: &FlowStudy, echo: Value, out: &Path) -> Result<i32> {
    let mut writer = RunWriter::new(out)?;
    let (status, seconds) = timed(|| run_flow(cfg, &mut writer));
    let points = vec![PointReport {
        value: None,
        label: "flow".into(),
        status: status?,
        expected_failure: false,
        seconds,
    }];
    writer.finish("flow", echo, None, points, seconds)
}

fn run_flow(cfg: &FlowStudy, writer: &mut RunWriter) -> Result<String> {
    let p = cfg.potential.build();
    match cfg.solver.kind.as_str() {
        "grid" => {
            let grid = match Grid1D::new(-cfg.solver.x_max, cfg.solver.x_max, cfg.solver.points) {
                Ok(g) => g,
                Err(e) => return Ok(status_of_error(&e)),
            };
            let traj = match evolve_grid(&p, &grid, &cfg.flow) {
                Ok(t) => t,
                Err(e) => return Ok(status_of_error(&e)),
            };
            writer.write("trajectory.csv", &trajectory_csv(&traj), "primary")?;
            writer.write("effective.csv", &potential_csv(traj.final_potential()), "detail")?;
            match extract_from_grid_trajectory(&traj) {
                Ok(set) => write_observables(writer, &set)?,
                Err(e) => {
                    if traj.termination.is_completed() {
                        return Ok(status_of_error(&e));
                    }
                }
            }
            Ok(status_of_termination(&traj.termination))
        }
        "couplings" => {
            let order = cfg.solver.order.expect("validated: couplings solver has an order");
            let (x0, expanded) = if cfg.solver.shift_to_minimum {
                match shift_to_minimum(&p) {
                    Ok(pair) => pair,
                    Err(e) => return Ok(status_of_error(&e)),
                }
            } else {
                (0.0, p)
            };
            let c0 = match CouplingVector::from_polynomial(&expanded, order, cfg.flow.lambda0) {
                Ok(c) => c,
                Err(e) => return Ok(status_of_error(&e)),
            };
            let traj = match evolve_couplings(&c0, &cfg.flow) {
                Ok(t) => t,
                Err(e) => return Ok(status_of_error(&e)),
            };
            writer.write("trajectory.csv", &couplings_csv(&traj), "primary")?;
            writer.write(
                "effective.csv",
                &couplings_row_csv(traj.final_couplings(), traj.snapshots[0].order()),
                "detail",
            )?;
            match extract_from_coupling_trajectory(&traj, x0) {
                Ok(set) => write_observables(writer, &set)?,
                Err(e) => {
                    if traj.termination.is_completed() {
                        return Ok(status_of_error(&e));
                    }
                }
            }
            Ok(status_of_termination(&traj.termination))
        }
        _ => unreachable!("validated solver kind"),
    }
}

fn write_observables(writer: &mut RunWriter, set: &ObservableSet) -> Result<()> {
    let text = format!("{}\n{}\n", ObservableSet::CSV_HEADER, set.csv_row());
    writer.write("observables.csv", &text, "detail")
}

/// Coupling snapshots as CSV, one row per snapshot.
fn couplings_csv(traj: &CouplingTrajectory) -> String {
    let order = traj.snapshots[0].order();
    let mut out = header(order);
    for snap in &traj.snapshots {
        push_row(&mut out, snap);
    }
    out
}

fn couplings_row_csv(c: &CouplingVector, order: usize) -> String {
    let mut out = header(order);
    push_row(&mut out, c);
    out
}

fn header(order: usize) -> String {
    let mut out = String::from("lambda");
    for n in 0..=order {
        out.push_str(&format!(",a{n}"));
    }
    out.push('\n');
    out
}

fn push_row(out: &mut String, c: &CouplingVector) {
    out.push_str(&fmt(c.lambda));
    for &a in &c.a {
        out.push(',');
        out.push_str(&fmt(a));
    }
    out.push('\n');
}
