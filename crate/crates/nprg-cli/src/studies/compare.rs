//! Compare verb: join the primary tables of several runs on their shared
//! parameter axis and append relative-deviation columns.
//!
//! Output columns, in order:
//!   1. the axis,
//!   2. every data column of every input, prefixed `m<i>.`,
//!   3. `dev.m<i>.<col>`: relative deviation of input *i*'s column
//!      against input 1's column of the same name (identical inputs give
//!      all-zero deviations),
//!   4. `dev_oracle.m<i>.<col>`: relative deviation of each `*_e0` /
//!      `*_gap` column against the same input's `oracle_e0` /
//!      `oracle_gap` column, when present.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::manifest::{fmt, load_manifest, Axis, PointReport, RunWriter};

/// One input's primary table, parsed.
struct Table {
    /// Column names past the axis column.
    columns: Vec<String>,
    /// Rows keyed by the axis cell, cells past the axis column.
    rows: BTreeMap<String, Vec<String>>,
}

pub fn run(manifest_paths: &[PathBuf], out: &Path) -> Result<i32> {
    let start = std::time::Instant::now();
    if manifest_paths.len() < 2 {
        bail!("compare needs at least two manifests");
    }

    let mut axis: Option<Axis> = None;
    let mut tables = Vec::new();
    let mut labels = Vec::new();
    for path in manifest_paths {
        let manifest = load_manifest(path)?;
        let this_axis = manifest
            .axis
            .clone()
            .with_context(|| format!("{} has no parameter axis to join on", path.display()))?;
        match &axis {
            None => axis = Some(this_axis),
            Some(a) => {
                if a.name != this_axis.name {
                    bail!(
                        "axis mismatch: `{}` joins on `{}`, earlier inputs on `{}`",
                        path.display(),
                        this_axis.name,
                        a.name
                    );
                }
                if a.values.len() != this_axis.values.len()
                    || a.values
                        .iter()
                        .zip(&this_axis.values)
                        .any(|(x, y)| fmt(*x) != fmt(*y))
                {
                    bail!(
                        "axis mismatch: `{}` covers different `{}` values than earlier inputs",
                        path.display(),
                        this_axis.name
                    );
                }
            }
        }
        let primary = manifest
            .files
            .iter()
            .find(|f| f.role == "primary")
            .with_context(|| format!("{} lists no primary table", path.display()))?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let table_path = dir.join(&primary.path);
        let text = std::fs::read_to_string(&table_path)
            .with_context(|| format!("cannot read {}", table_path.display()))?;
        tables.push(parse_table(&text, &axis.as_ref().unwrap().name, &table_path)?);
        labels.push(path.display().to_string());
    }
    let axis = axis.expect("at least two inputs");

    // Header: passthrough blocks, then cross-input deviations, then
    // per-input deviations against that input's own oracle columns.
    let mut header = vec![axis.name.clone()];
    for (i, t) in tables.iter().enumerate() {
        for c in &t.columns {
            header.push(format!("m{}.{c}", i + 1));
        }
    }
    let mut cross: Vec<(usize, usize, usize)> = Vec::new(); // (input, col there, col in input 1)
    for (i, t) in tables.iter().enumerate().skip(1) {
        for (j, c) in t.columns.iter().enumerate() {
            if let Some(j0) = tables[0].columns.iter().position(|c0| c0 == c) {
                header.push(format!("dev.m{}.{c}", i + 1));
                cross.push((i, j, j0));
            }
        }
    }
    let mut vs_oracle: Vec<(usize, usize, usize)> = Vec::new(); // (input, col, oracle col)
    for (i, t) in tables.iter().enumerate() {
        for (j, c) in t.columns.iter().enumerate() {
            for suffix in ["_e0", "_gap"] {
                if c.ends_with(suffix) && !c.starts_with("oracle") {
                    let oracle_name = format!("oracle{suffix}");
                    if let Some(jo) = t.columns.iter().position(|c0| *c0 == oracle_name) {
                        header.push(format!("dev_oracle.m{}.{c}", i + 1));
                        vs_oracle.push((i, j, jo));
                    }
                }
            }
        }
    }

    let mut csv = header.join(",");
    csv.push('\n');
    for &v in &axis.values {
        let key = fmt(v);
        let mut cells = vec![key.clone()];
        for t in &tables {
            match t.rows.get(&key) {
                Some(row) => cells.extend(row.iter().cloned()),
                None => cells.extend(std::iter::repeat(String::new()).take(t.columns.len())),
            }
        }
        for &(i, j, j0) in &cross {
            cells.push(deviation(cell(&tables[i], &key, j), cell(&tables[0], &key, j0)));
        }
        for &(i, j, jo) in &vs_oracle {
            cells.push(deviation(cell(&tables[i], &key, j), cell(&tables[i], &key, jo)));
        }
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }

    let mut writer = RunWriter::new(out)?;
    writer.write("compare.csv", &csv, "primary")?;
    let seconds = start.elapsed().as_secs_f64();
    let points = labels
        .iter()
        .map(|l| PointReport {
            value: None,
            label: l.clone(),
            status: "completed".into(),
            expected_failure: false,
            seconds: 0.0,
        })
        .collect();
    let echo = serde_json::json!({ "study": "compare", "inputs": labels });
    writer.finish("compare", echo, Some(axis), points, seconds)
}

fn parse_table(text: &str, axis_name: &str, path: &Path) -> Result<Table> {
    let mut lines = text.lines();
    let header = lines.next().with_context(|| format!("{} is empty", path.display()))?;
    let mut cols = header.split(',').map(str::to_owned);
    let first = cols.next().unwrap_or_default();
    if first != axis_name {
        bail!(
            "{}: first column `{first}` does not match the join axis `{axis_name}`",
            path.display()
        );
    }
    let columns: Vec<String> = cols.collect();
    let mut rows = BTreeMap::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',').map(str::to_owned);
        let key = cells.next().unwrap_or_default();
        let rest: Vec<String> = cells.collect();
        if rest.len() != columns.len() {
            bail!("{}: ragged row at {key}", path.display());
        }
        rows.insert(key, rest);
    }
    Ok(Table { columns, rows })
}

fn cell<'t>(t: &'t Table, key: &str, j: usize) -> Option<&'t str> {
    t.rows.get(key).map(|row| row[j].as_str())
}

/// Relative deviation `(v - r)/|r|`, empty when either side is missing or
/// non-numeric, `0` when both sides are exactly zero.
fn deviation(value: Option<&str>, reference: Option<&str>) -> String {
    let (Some(v), Some(r)) = (value, reference) else { return String::new() };
    let (Ok(v), Ok(r)) = (v.parse::<f64>(), r.parse::<f64>()) else { return String::new() };
    if !v.is_finite() || !r.is_finite() {
        return String::new();
    }
    if r == 0.0 {
        return if v == 0.0 { fmt(0.0) } else { String::new() };
    }
    fmt((v - r) / r.abs())
}
