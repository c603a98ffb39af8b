//! Sweep study: observables over a coupling axis, one column block per
//! method, one row per axis value.
//!
//! Points run independently: a solver failure at one value fills that
//! row's cells with its status and leaves every other row intact. The
//! oracle columns make sweep outputs directly joinable by `compare`.

use std::path::Path;

use anyhow::Result;
use serde_json::Value;

use nprg::coupling_flow::{evolve_couplings, CouplingVector};
use nprg::grid::Grid1D;
use nprg::grid_flow::evolve_grid;
use nprg::observables::{extract_from_coupling_trajectory, extract_from_grid_trajectory};
use nprg::oracle::solve_auto;
use nprg::parallel::par_map;
use nprg::potentials::shift_to_minimum;
use nprg::references::{instanton_gap, perturbative_energy};

use crate::config::{family_potential, SweepStudy};
use crate::manifest::{fmt, fmt_opt, status_of_error, status_of_termination, Axis, PointReport, RunWriter};
use crate::studies::{expected, sorted_axis, timed};

/// One method's outcome at one axis value.
struct MethodCells {
    e0: Option<f64>,
    gap: Option<f64>,
    m2: Option<f64>,
    m4: Option<f64>,
    status: String,
}

impl MethodCells {
    fn failed(status: String) -> Self {
        Self { e0: None, gap: None, m2: None, m4: None, status }
    }
}

pub fn run(cfg: &SweepStudy, echo: Value, out: &Path) -> Result<i32> {
    let start = std::time::Instant::now();
    let values = sorted_axis(&cfg.values);
    let results = par_map(values.clone(), |v| timed(|| point(cfg, v)));

    let mut csv = String::from("lambda0");
    for m in &cfg.methods {
        csv.push_str(&format!(",{m}_e0,{m}_gap,{m}_m2,{m}_m4,{m}_status"));
    }
    csv.push('\n');
    let mut points = Vec::with_capacity(values.len());
    for (&v, (cells, seconds)) in values.iter().zip(&results) {
        csv.push_str(&fmt(v));
        let mut failures = Vec::new();
        for (m, c) in cfg.methods.iter().zip(cells) {
            csv.push_str(&format!(
                ",{},{},{},{},{}",
                fmt_opt(c.e0),
                fmt_opt(c.gap),
                fmt_opt(c.m2),
                fmt_opt(c.m4),
                c.status
            ));
            if c.status != "completed" {
                failures.push(format!("{m}:{}", c.status));
            }
        }
        csv.push('\n');
        points.push(PointReport {
            value: Some(v),
            label: format!("lambda0={}", fmt(v)),
            status: if failures.is_empty() { "completed".into() } else { failures.join(";") },
            expected_failure: expected(v, &cfg.expected_failures),
            seconds: *seconds,
        });
    }

    let mut writer = RunWriter::new(out)?;
    writer.write("sweep.csv", &csv, "primary")?;
    let axis = Axis { name: "lambda0".into(), values };
    writer.finish("sweep", echo, Some(axis), points, start.elapsed().as_secs_f64())
}

/// Evaluates every requested method at one axis value.
fn point(cfg: &SweepStudy, v: f64) -> Vec<MethodCells> {
    cfg.methods.iter().map(|m| method(cfg, m, v)).collect()
}

fn method(cfg: &SweepStudy, method: &str, v: f64) -> MethodCells {
    let p = match family_potential(&cfg.family, v, cfg.h0) {
        Ok(p) => p,
        Err(e) => return MethodCells::failed(e.to_string()),
    };
    match method {
        "grid" => {
            let grid = match Grid1D::new(-cfg.x_max, cfg.x_max, cfg.points) {
                Ok(g) => g,
                Err(e) => return MethodCells::failed(status_of_error(&e)),
            };
            let traj = match evolve_grid(&p, &grid, &cfg.flow) {
                Ok(t) => t,
                Err(e) => return MethodCells::failed(status_of_error(&e)),
            };
            let set = match extract_from_grid_trajectory(&traj) {
                Ok(s) => s,
                // Report the flow's own failure mode when extraction was
                // refused because the flow never finished.
                Err(_) if !traj.termination.is_completed() => {
                    return MethodCells::failed(status_of_termination(&traj.termination))
                }
                Err(e) => return MethodCells::failed(status_of_error(&e)),
            };
            MethodCells {
                e0: Some(set.e0),
                gap: Some(set.m_eff),
                m2: set.m2,
                m4: set.m4,
                status: status_of_termination(&traj.termination),
            }
        }
        "couplings" => {
            let (x0, expanded) = if cfg.shift_to_minimum {
                match shift_to_minimum(&p) {
                    Ok(pair) => pair,
                    Err(e) => return MethodCells::failed(status_of_error(&e)),
                }
            } else {
                (0.0, p)
            };
            let c0 = match CouplingVector::from_polynomial(&expanded, cfg.order, cfg.flow.lambda0)
            {
                Ok(c) => c,
                Err(e) => return MethodCells::failed(status_of_error(&e)),
            };
            let traj = match evolve_couplings(&c0, &cfg.flow) {
                Ok(t) => t,
                Err(e) => return MethodCells::failed(status_of_error(&e)),
            };
            let set = match extract_from_coupling_trajectory(&traj, x0) {
                Ok(s) => s,
                Err(_) if !traj.termination.is_completed() => {
                    return MethodCells::failed(status_of_termination(&traj.termination))
                }
                Err(e) => return MethodCells::failed(status_of_error(&e)),
            };
            MethodCells {
                e0: Some(set.e0),
                gap: Some(set.m_eff),
                m2: set.m2,
                m4: set.m4,
                status: status_of_termination(&traj.termination),
            }
        }
        "oracle" => {
            let k = cfg.oracle_states.max(2);
            let sol = match solve_auto(&p, k) {
                Ok(s) => s,
                Err(e) => return MethodCells::failed(status_of_error(&e)),
            };
            let raw: Vec<f64> =
                (0..=4u32).map(|n| sol.matrix_element(0, 0, n)).collect();
            let m1 = raw[1];
            let m2 = raw[2] - m1 * m1;
            let m4 = raw[4] - 4.0 * raw[3] * m1 + 6.0 * raw[2] * m1 * m1 - 3.0 * m1.powi(4);
            MethodCells {
                e0: Some(sol.energies[0]),
                gap: Some(sol.energies[1] - sol.energies[0]),
                m2: Some(m2),
                m4: Some(m4),
                status: "completed".into(),
            }
        }
        "perturbation2" => {
            if cfg.family != "single_well" {
                return MethodCells::failed("unsupported_family".into());
            }
            let e0 = perturbative_energy(0, v);
            let e1 = perturbative_energy(1, v);
            MethodCells {
                e0: Some(e0),
                gap: Some(e1 - e0),
                m2: None,
                m4: None,
                status: "completed".into(),
            }
        }
        "instanton" => {
            if cfg.family != "double_well" {
                return MethodCells::failed("unsupported_family".into());
            }
            MethodCells {
                e0: None,
                gap: Some(instanton_gap(v)),
                m2: None,
                m4: None,
                status: "completed".into(),
            }
        }
        _ => unreachable!("validated sweep method"),
    }
}
