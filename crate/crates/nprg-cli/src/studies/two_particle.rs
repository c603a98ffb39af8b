//! Two-particle study: energy gap of two coupled quartic wells per
//! interaction form, against the first-order perturbative reference and
//! the decoupled one-particle gap.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use nprg::coupling_flow::{evolve_couplings, CouplingVector};
use nprg::observables::{
    extract_from_coupling_trajectory, two_field_gap, TruncatedSeriesPotential,
};
use nprg::oracle::two_particle_first_order_gap;
use nprg::parallel::par_map;
use nprg::potentials::{double_well, rotate_to_normal_coordinates, two_particle_bare, Interaction};
use nprg::two_field::evolve_two_field;

use crate::config::TwoParticleStudy;
use crate::manifest::{fmt, fmt_opt, status_of_error, status_of_termination, PointReport, RunWriter};
use crate::studies::timed;

struct GapRow {
    gap: Option<f64>,
    status: String,
    first_order_gap: Option<f64>,
}

#[derive(Serialize)]
struct TwoParticleSummary {
    lambda0: f64,
    order: usize,
    /// Gap of one decoupled well from the same truncation, the `C = 0`
    /// consistency target.
    one_particle_gap: Option<f64>,
    one_particle_status: String,
}

pub fn run(cfg: &TwoParticleStudy, echo: Value, out: &Path) -> Result<i32> {
    let start = std::time::Instant::now();
    let rows = par_map(cfg.interactions.clone(), |i| timed(|| point(cfg, &i)));
    let (one_gap, one_status) = one_particle_gap(cfg);

    let mut csv = String::from("index,form,strength,gap,status,first_order_gap\n");
    let mut points = Vec::with_capacity(rows.len());
    for (idx, (interaction, (row, seconds))) in cfg.interactions.iter().zip(&rows).enumerate() {
        let form = match interaction {
            Interaction::Linear { .. } => "linear",
            Interaction::Quadratic { .. } => "quadratic",
            Interaction::Quartic { .. } => "quartic",
        };
        csv.push_str(&format!(
            "{idx},{form},{},{},{},{}\n",
            fmt(interaction.strength()),
            fmt_opt(row.gap),
            row.status,
            fmt_opt(row.first_order_gap),
        ));
        points.push(PointReport {
            value: Some(interaction.strength()),
            label: format!("{form} C={}", fmt(interaction.strength())),
            status: row.status.clone(),
            expected_failure: cfg.expected_failures.contains(&idx),
            seconds: *seconds,
        });
    }

    let summary = TwoParticleSummary {
        lambda0: cfg.lambda0,
        order: cfg.order,
        one_particle_gap: one_gap,
        one_particle_status: one_status,
    };

    let mut writer = RunWriter::new(out)?;
    writer.write("two_particle.csv", &csv, "primary")?;
    writer.write("summary.json", &serde_json::to_string_pretty(&summary)?, "detail")?;
    writer.finish("two_particle", echo, None, points, start.elapsed().as_secs_f64())
}

fn point(cfg: &TwoParticleStudy, interaction: &Interaction) -> GapRow {
    let first_order = two_particle_first_order_gap(cfg.lambda0, interaction).ok();
    let bare = two_particle_bare(cfg.lambda0, interaction, cfg.order);
    let rotated = rotate_to_normal_coordinates(&bare);
    let traj = match evolve_two_field(&rotated, &cfg.flow) {
        Ok(t) => t,
        Err(e) => {
            return GapRow { gap: None, status: status_of_error(&e), first_order_gap: first_order }
        }
    };
    let status = status_of_termination(&traj.termination);
    let gap = if traj.termination.is_completed() {
        match two_field_gap(&TruncatedSeriesPotential { series: traj.final_series() }) {
            Ok(g) => Some(g),
            Err(e) => {
                return GapRow {
                    gap: None,
                    status: status_of_error(&e),
                    first_order_gap: first_order,
                }
            }
        }
    } else {
        None
    };
    GapRow { gap, status, first_order_gap: first_order }
}

/// Gap of a single decoupled well at the same truncation order.
fn one_particle_gap(cfg: &TwoParticleStudy) -> (Option<f64>, String) {
    let p = double_well(cfg.lambda0);
    let c0 = match CouplingVector::from_polynomial(&p, cfg.order, cfg.flow.lambda0) {
        Ok(c) => c,
        Err(e) => return (None, status_of_error(&e)),
    };
    let traj = match evolve_couplings(&c0, &cfg.flow) {
        Ok(t) => t,
        Err(e) => return (None, status_of_error(&e)),
    };
    match extract_from_coupling_trajectory(&traj, 0.0) {
        Ok(set) => (Some(set.m_eff), status_of_termination(&traj.termination)),
        Err(_) if !traj.termination.is_completed() => {
            (None, status_of_termination(&traj.termination))
        }
        Err(e) => (None, status_of_error(&e)),
    }
}
