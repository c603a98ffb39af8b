//! Flow-diagram study: classify a lattice of dimensionless seeds into
//! phase basins, optionally keeping every trajectory.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use nprg::dimensionless::{
    classify_seed, evolve_dimensionless, seed_grid, trajectory_csv, Basin,
};
use nprg::parallel::par_map;

use crate::config::FlowDiagramStudy;
use crate::manifest::{fmt, PointReport, RunWriter};

#[derive(Serialize)]
struct DiagramSummary {
    order: usize,
    seeds: usize,
    symmetric: usize,
    broken: usize,
    undecided: usize,
    errors: usize,
    broken_fraction: f64,
}

pub fn run(cfg: &FlowDiagramStudy, echo: Value, out: &Path) -> Result<i32> {
    let start = std::time::Instant::now();
    let seeds = seed_grid(cfg.order, cfg.n2, cfg.n4, cfg.a2_range, cfg.a4_range);
    let labels = par_map(seeds.clone(), |s| classify_seed(&s, cfg.t_max));

    let mut csv = String::from("a2,a4,basin\n");
    let (mut sym, mut broken, mut undecided, mut errors) = (0usize, 0usize, 0usize, 0usize);
    for (seed, label) in seeds.iter().zip(&labels) {
        let name = match label {
            Ok(Basin::Symmetric) => {
                sym += 1;
                "symmetric"
            }
            Ok(Basin::Broken) => {
                broken += 1;
                "broken"
            }
            Ok(Basin::Undecided) => {
                undecided += 1;
                "undecided"
            }
            Err(_) => {
                errors += 1;
                "error"
            }
        };
        csv.push_str(&format!("{},{},{name}\n", fmt(seed.ahat[2]), fmt(seed.ahat[4])));
    }

    let summary = DiagramSummary {
        order: cfg.order,
        seeds: seeds.len(),
        symmetric: sym,
        broken,
        undecided,
        errors,
        broken_fraction: broken as f64 / seeds.len() as f64,
    };

    let mut writer = RunWriter::new(out)?;
    writer.write("basins.csv", &csv, "primary")?;
    writer.write("summary.json", &serde_json::to_string_pretty(&summary)?, "detail")?;

    if cfg.write_trajectories {
        let trajectories =
            par_map(seeds.clone(), |s| evolve_dimensionless(&s, cfg.t_max, cfg.trajectory_points));
        for (i, traj) in trajectories.iter().enumerate() {
            if let Ok(t) = traj {
                writer.write(&format!("seeds/seed_{i:03}.csv"), &trajectory_csv(t), "detail")?;
            }
        }
    }

    // Classification failures are data (the `error` rows), not run
    // failures; the run itself always completes.
    let seconds = start.elapsed().as_secs_f64();
    let point = PointReport {
        value: None,
        label: format!("{}x{} seed lattice", cfg.n2, cfg.n4),
        status: "completed".into(),
        expected_failure: false,
        seconds,
    };
    writer.finish("flow_diagram", echo, None, vec![point], seconds)
}
