//! Pole study: dipole pole-dominance diagnostics of the two-point
//! function over a coupling axis, from the spectral oracle.

use std::path::Path;

use anyhow::Result;
use serde_json::Value;

use nprg::oracle::{pole_coefficients, poles_csv, solve_auto};
use nprg::parallel::par_map;

use crate::config::{family_potential, PolesStudy};
use crate::manifest::{fmt, fmt_opt, status_of_error, Axis, PointReport, RunWriter};
use crate::studies::{expected, sorted_axis, timed};

struct PoleRow {
    d1: Option<f64>,
    sum_rule_residual: Option<f64>,
    status: String,
    table: Option<String>,
}

pub fn run(cfg: &PolesStudy, echo: Value, out: &Path) -> Result<i32> {
    let start = std::time::Instant::now();
    let values = sorted_axis(&cfg.values);
    let results = par_map(values.clone(), |v| timed(|| point(cfg, v)));

    let mut csv = String::from("lambda0,d1,sum_rule_residual,status\n");
    let mut points = Vec::with_capacity(values.len());
    for (&v, (row, seconds)) in values.iter().zip(&results) {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt(v),
            fmt_opt(row.d1),
            fmt_opt(row.sum_rule_residual),
            row.status,
        ));
        points.push(PointReport {
            value: Some(v),
            label: format!("lambda0={}", fmt(v)),
            status: row.status.clone(),
            expected_failure: expected(v, &cfg.expected_failures),
            seconds: *seconds,
        });
    }

    let mut writer = RunWriter::new(out)?;
    writer.write("poles.csv", &csv, "primary")?;
    for (i, (row, _)) in results.iter().enumerate() {
        if let Some(table) = &row.table {
            writer.write(&format!("tables/poles_{i:02}.csv"), table, "detail")?;
        }
    }
    let axis = Axis { name: "lambda0".into(), values };
    writer.finish("poles", echo, Some(axis), points, start.elapsed().as_secs_f64())
}

fn point(cfg: &PolesStudy, v: f64) -> PoleRow {
    let p = match family_potential(&cfg.family, v, cfg.h0) {
        Ok(p) => p,
        Err(e) => {
            return PoleRow { d1: None, sum_rule_residual: None, status: e.to_string(), table: None }
        }
    };
    let sol = match solve_auto(&p, cfg.n_states) {
        Ok(s) => s,
        Err(e) => {
            return PoleRow {
                d1: None,
                sum_rule_residual: None,
                status: status_of_error(&e),
                table: None,
            }
        }
    };
    match pole_coefficients(&sol, cfg.n_states) {
        Ok(poles) => PoleRow {
            d1: Some(poles.d[1]),
            sum_rule_residual: Some(poles.sum_rule_residual),
            status: "completed".into(),
            table: Some(poles_csv(&poles)),
        },
        Err(e) => PoleRow {
            d1: None,
            sum_rule_residual: None,
            status: status_of_error(&e),
            table: None,
        },
    }
}
