use std::io::BufRead;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sweep::SweepRow;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub items: usize,
    pub records: usize,
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Checks a result table: rows sorted by (run, step), steps contiguous from
/// zero within each run, every metric in `[0,1]`, and every metric
/// non-decreasing within a run. `items` counts runs.
pub fn check_result_rows(rows: &[SweepRow]) -> Result<CheckReport> {
    let mut runs = 0;
    let mut prev: Option<&SweepRow> = None;
    for (i, row) in rows.iter().enumerate() {
        let m = &row.metrics;
        let values = [
            ("avg_gl_companies", m.avg_gl_companies),
            ("avg_gl_banks", m.avg_gl_banks),
            ("frac_influenced_companies", m.frac_influenced_companies),
            ("frac_influenced_banks", m.frac_influenced_banks),
        ];
        if let Some((name, v)) = values.iter().find(|(_, v)| !in_unit(*v)) {
            return Err(Error::Trajectory(format!(
                "row {i}: {name} = {v} outside [0,1]"
            )));
        }
        match prev {
            Some(p) if p.run_id == row.run_id => {
                if m.step != p.metrics.step + 1 {
                    return Err(Error::Trajectory(format!(
                        "row {i}: run {} jumps from step {} to {}",
                        row.run_id, p.metrics.step, m.step
                    )));
                }
                let before = [
                    p.metrics.avg_gl_companies,
                    p.metrics.avg_gl_banks,
                    p.metrics.frac_influenced_companies,
                    p.metrics.frac_influenced_banks,
                ];
                for ((name, v), b) in values.iter().zip(before) {
                    if *v < b {
                        return Err(Error::Trajectory(format!(
                            "row {i}: {name} decreases in run {} ({b} -> {v})",
                            row.run_id
                        )));
                    }
                }
            }
            _ => {
                if let Some(p) = prev {
                    if row.run_id < p.run_id {
                        return Err(Error::Trajectory(format!("row {i}: runs out of order")));
                    }
                }
                if m.step != 0 {
                    return Err(Error::Trajectory(format!(
                        "row {i}: run {} starts at step {}",
                        row.run_id, m.step
                    )));
                }
                runs += 1;
            }
        }
        prev = Some(row);
    }
    Ok(CheckReport {
        items: runs,
        records: rows.len(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateLine {
    step: u32,
    gl: Vec<f64>,
}

/// Checks a JSON-lines file of `{"step": k, "gl": [...]}` snapshots: steps
/// contiguous from zero, constant vector length, every level in `[0,1]` and
/// non-decreasing per node. `items` counts nodes.
pub fn check_state_lines<R: BufRead>(reader: R) -> Result<CheckReport> {
    let mut prev: Option<StateLine> = None;
    let mut records = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Trajectory(format!("line {}: {e}", i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let snap: StateLine = serde_json::from_str(&line)
            .map_err(|e| Error::Trajectory(format!("line {}: {e}", i + 1)))?;
        if let Some(v) = snap.gl.iter().position(|g| !in_unit(*g)) {
            return Err(Error::Trajectory(format!(
                "step {}: node {v} level {} outside [0,1]",
                snap.step, snap.gl[v]
            )));
        }
        match &prev {
            None if snap.step != 0 => {
                return Err(Error::Trajectory(format!(
                    "first snapshot is step {}",
                    snap.step
                )));
            }
            Some(p) => {
                if snap.step != p.step + 1 || snap.gl.len() != p.gl.len() {
                    return Err(Error::Trajectory(format!(
                        "line {}: snapshot does not follow step {}",
                        i + 1,
                        p.step
                    )));
                }
                if let Some(v) = snap.gl.iter().zip(&p.gl).position(|(a, b)| a < b) {
                    return Err(Error::Trajectory(format!(
                        "step {}: node {v} decreases from {} to {}",
                        snap.step, p.gl[v], snap.gl[v]
                    )));
                }
            }
            None => {}
        }
        records += 1;
        prev = Some(snap);
    }
    Ok(CheckReport {
        items: prev.map_or(0, |p| p.gl.len()),
        records,
    })
}
