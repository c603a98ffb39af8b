//! Fixed-point study: roots of the dimensionless flow per truncation
//! order, with their linearized spectra.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use nprg::fixed_points::{find_fixed_points, FixedPoint, SearchBox};
use nprg::parallel::par_map;

use crate::config::FixedPointsStudy;
use crate::manifest::{fmt, PointReport, RunWriter};
use crate::studies::timed;

#[derive(Serialize)]
struct OrderReport {
    order: usize,
    fixed_points: Vec<FixedPoint>,
}

pub fn run(cfg: &FixedPointsStudy, echo: Value, out: &Path) -> Result<i32> {
    let start = std::time::Instant::now();
    let mut orders = cfg.orders.clone();
    orders.sort_unstable();
    orders.dedup();

    let search = SearchBox { a2: cfg.a2_range, a4: cfg.a4_range, per_axis: cfg.per_axis };
    let results = par_map(orders.clone(), |n| timed(|| find_fixed_points(n, &search)));

    let mut reports = Vec::new();
    let mut csv = String::from("order,ahat2,ahat4,relevant,gaussian,eig1_re,eig1_im,eig2_re,eig2_im\n");
    let mut points = Vec::new();
    for (&order, (roots, seconds)) in orders.iter().zip(&results) {
        for fp in roots {
            let eig = |k: usize| fp.eigenvalues.get(k).copied().unwrap_or((f64::NAN, f64::NAN));
            let (e1r, e1i) = eig(0);
            let (e2r, e2i) = eig(1);
            csv.push_str(&format!(
                "{order},{},{},{},{},{},{},{},{}\n",
                fmt(fp.ahat[2]),
                fmt(fp.ahat[4]),
                fp.relevant,
                fp.is_gaussian(),
                fmt(e1r),
                fmt(e1i),
                fmt(e2r),
                fmt(e2i),
            ));
        }
        points.push(PointReport {
            value: Some(order as f64),
            label: format!("order={order}"),
            status: "completed".into(),
            expected_failure: false,
            seconds: *seconds,
        });
        reports.push(OrderReport { order, fixed_points: roots.clone() });
    }

    let mut writer = RunWriter::new(out)?;
    writer.write("fixed_points.json", &serde_json::to_string_pretty(&reports)?, "primary")?;
    writer.write("fixed_points.csv", &csv, "detail")?;
    writer.finish("fixed_points", echo, None, points, start.elapsed().as_secs_f64())
}
