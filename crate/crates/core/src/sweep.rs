//! Parameter grids, replicated runs and their aggregation.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_simulation, SpreadParams};
use crate::error::{Error, Result};
use crate::metrics::{mean, StepMetrics};
use crate::netgen::{assemble_network, MultilayerNetwork};
use crate::seed;

/// A cartesian grid of diffusion parameters. Defaults reproduce the
/// experimental grid of the reference study (1200 cells).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub eips: Vec<f64>,
    pub eits: Vec<u32>,
    pub lts: Vec<f64>,
    pub ss: u32,
    pub sgl: f64,
    pub replicates: u32,
    pub base_seed: u64,
    /// Draw a fresh network for every replicate instead of sharing one.
    pub regenerate_network_per_replicate: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            alphas: vec![0.05, 0.1],
            deltas: vec![0.05, 0.1],
            eips: vec![0.25, 0.5, 0.75, 1.0],
            eits: (1..=15).collect(),
            lts: vec![0.05, 0.1, 0.15, 0.2, 0.25],
            ss: 100,
            sgl: 0.0,
            replicates: 30,
            base_seed: 0,
            regenerate_network_per_replicate: false,
        }
    }
}

impl GridSpec {
    pub fn n_cells(&self) -> usize {
        self.alphas.len() * self.deltas.len() * self.eips.len() * self.eits.len() * self.lts.len()
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("alphas", self.alphas.is_empty()),
            ("deltas", self.deltas.is_empty()),
            ("eips", self.eips.is_empty()),
            ("eits", self.eits.is_empty()),
            ("lts", self.lts.is_empty()),
        ];
        for (key, empty) in lists {
            if empty {
                return Err(Error::config(key, "must not be empty"));
            }
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be a positive integer"));
        }
        let probe = |key: &str, values: &[f64], set: fn(&mut SpreadParams, f64)| -> Result<()> {
            for &v in values {
                let mut p = SpreadParams::default();
                set(&mut p, v);
                p.validate()
                    .map_err(|_| Error::config(key, format!("values must be in [0,1], got {v}")))?;
            }
            Ok(())
        };
        probe("alphas", &self.alphas, |p, v| p.alpha = v)?;
        probe("deltas", &self.deltas, |p, v| p.delta = v)?;
        probe("eips", &self.eips, |p, v| p.eip = v)?;
        probe("lts", &self.lts, |p, v| p.lt = v)?;
        probe("sgl", &[self.sgl], |p, v| p.sgl = v)?;
        Ok(())
    }

    /// Parameters of `cell` for one replicate; the seed mixes the base seed
    /// with the cell index and the replicate index.
    pub fn params(&self, cell: &GridCell, replicate: u32) -> SpreadParams {
        SpreadParams {
            sgl: self.sgl,
            alpha: cell.alpha,
            delta: cell.delta,
            eip: cell.eip,
            eit: cell.eit,
            ss: self.ss,
            lt: cell.lt,
            seed: run_seed(self.base_seed, cell.index, replicate),
        }
    }
}

pub fn run_seed(base_seed: u64, cell_index: usize, replicate: u32) -> u64 {
    seed::mix(base_seed, &[cell_index as u64, u64::from(replicate)])
}

/// One point of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub index: usize,
    pub alpha: f64,
    pub delta: f64,
    pub eip: f64,
    pub eit: u32,
    pub lt: f64,
}

/// Grid cells in cartesian order alpha, delta, eip, eit, lt (lt fastest).
pub fn enumerate_cells(grid: &GridSpec) -> Result<Vec<GridCell>> {
    grid.validate()?;
    let mut cells = Vec::with_capacity(grid.n_cells());
    for &alpha in &grid.alphas {
        for &delta in &grid.deltas {
            for &eip in &grid.eips {
                for &eit in &grid.eits {
                    for &lt in &grid.lts {
                        cells.push(GridCell {
                            index: cells.len(),
                            alpha,
                            delta,
                            eip,
                            eit,
                            lt,
                        });
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// Metrics of one (cell, replicate) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub cell: GridCell,
    pub replicate: u32,
    pub seed: u64,
    pub metrics: Vec<StepMetrics>,
}

impl RunRecord {
    pub fn final_metrics(&self) -> &StepMetrics {
        self.metrics.last().expect("runs have a step-0 snapshot")
    }

    pub fn rows(&self) -> impl Iterator<Item = SweepRow> + '_ {
        self.metrics.iter().map(move |m| SweepRow {
            run_id: self.run_id,
            cell_index: self.cell.index,
            replicate: self.replicate,
            seed: self.seed,
            alpha: self.cell.alpha,
            delta: self.cell.delta,
            eip: self.cell.eip,
            eit: self.cell.eit,
            lt: self.cell.lt,
            metrics: *m,
        })
    }
}

/// One line of the long-format result table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub run_id: u64,
    pub cell_index: usize,
    pub replicate: u32,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
    pub eip: f64,
    pub eit: u32,
    pub lt: f64,
    pub metrics: StepMetrics,
}

/// Runs sorted by cell index, then replicate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub runs: Vec<RunRecord>,
}

impl SweepResult {
    pub fn rows(&self) -> impl Iterator<Item = SweepRow> + '_ {
        self.runs.iter().flat_map(RunRecord::rows)
    }

    pub fn n_rows(&self) -> usize {
        self.runs.iter().map(|r| r.metrics.len()).sum()
    }
}

fn networks_for(grid: &GridSpec, net: &MultilayerNetwork) -> Result<Vec<MultilayerNetwork>> {
    if !grid.regenerate_network_per_replicate {
        return Ok(Vec::new());
    }
    (0..grid.replicates)
        .map(|r| {
            let mut cfg = net.config().clone();
            cfg.seed = seed::mix(cfg.seed, &[u64::from(r)]);
            assemble_network(&cfg)
        })
        .collect()
}

/// Runs every (cell, replicate) pair and hands the records to `sink` in
/// (cell, replicate) order, independent of `parallelism`.
pub fn run_sweep_streaming<F>(
    grid: &GridSpec,
    net: &MultilayerNetwork,
    parallelism: usize,
    mut sink: F,
) -> Result<usize>
where
    F: FnMut(RunRecord) -> Result<()>,
{
    if parallelism == 0 {
        return Err(Error::config("threads", "must be a positive integer"));
    }
    let cells = enumerate_cells(grid)?;
    for cell in &cells {
        grid.params(cell, 0).validate().map_err(|e| Error::Sweep {
            cell_index: cell.index,
            source: Box::new(e),
        })?;
    }
    let networks = networks_for(grid, net)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;

    let reps = grid.replicates as usize;
    let total = cells.len() * reps;
    let batch = (parallelism * 32).max(64);
    let mut emitted = 0;
    for start in (0..total).step_by(batch) {
        let end = (start + batch).min(total);
        let records: Vec<Result<RunRecord>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|unit| {
                    let cell = &cells[unit / reps];
                    let replicate = (unit % reps) as u32;
                    let params = grid.params(cell, replicate);
                    let network = networks.get(replicate as usize).unwrap_or(net);
                    let trajectory =
                        run_simulation(network, &params).map_err(|e| Error::Sweep {
                            cell_index: cell.index,
                            source: Box::new(e),
                        })?;
                    Ok(RunRecord {
                        run_id: unit as u64,
                        cell: *cell,
                        replicate,
                        seed: params.seed,
                        metrics: trajectory.metrics,
                    })
                })
                .collect()
        });
        for record in records {
            sink(record?)?;
            emitted += 1;
        }
    }
    Ok(emitted)
}

pub fn run_sweep(
    grid: &GridSpec,
    net: &MultilayerNetwork,
    parallelism: usize,
) -> Result<SweepResult> {
    let mut runs = Vec::with_capacity(grid.n_cells() * grid.replicates as usize);
    run_sweep_streaming(grid, net, parallelism, |r| {
        runs.push(r);
        Ok(())
    })?;
    Ok(SweepResult { runs })
}

/// Grid dimension usable as an aggregation key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridParam {
    Alpha,
    Delta,
    Eip,
    Eit,
    Lt,
}

impl GridParam {
    pub fn name(self) -> &'static str {
        match self {
            GridParam::Alpha => "alpha",
            GridParam::Delta => "delta",
            GridParam::Eip => "eip",
            GridParam::Eit => "eit",
            GridParam::Lt => "lt",
        }
    }

    pub fn value(self, cell: &GridCell) -> f64 {
        match self {
            GridParam::Alpha => cell.alpha,
            GridParam::Delta => cell.delta,
            GridParam::Eip => cell.eip,
            GridParam::Eit => f64::from(cell.eit),
            GridParam::Lt => cell.lt,
        }
    }
}

impl fmt::Display for GridParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GridParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(GridParam::Alpha),
            "delta" => Ok(GridParam::Delta),
            "eip" => Ok(GridParam::Eip),
            "eit" => Ok(GridParam::Eit),
            "lt" => Ok(GridParam::Lt),
            other => Err(Error::config(
                "group_by",
                format!("unknown parameter `{other}`, expected one of alpha, delta, eip, eit, lt"),
            )),
        }
    }
}

/// Mean and sample standard deviation of `avg_gl_companies` over the runs
/// of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub key: Vec<(GridParam, f64)>,
    pub n_runs: usize,
    pub final_mean: f64,
    pub final_std: f64,
    pub step_mean: Vec<f64>,
    pub step_std: Vec<f64>,
}

impl GroupSummary {
    /// Standard error of `final_mean`.
    pub fn final_sem(&self) -> f64 {
        self.final_std / (self.n_runs as f64).sqrt()
    }
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Group key with the per-run step series collected for it.
type GroupRuns = (Vec<(GridParam, f64)>, Vec<Vec<f64>>);

/// Incremental version of [`aggregate`] for streamed sweeps.
#[derive(Debug, Clone)]
pub struct Aggregator {
    group_by: Vec<GridParam>,
    index: HashMap<Vec<u64>, usize>,
    groups: Vec<GroupRuns>,
}

impl Aggregator {
    pub fn new(group_by: &[GridParam]) -> Self {
        Aggregator {
            group_by: group_by.to_vec(),
            index: HashMap::new(),
            groups: Vec::new(),
        }
    }

    pub fn push(&mut self, run: &RunRecord) {
        let key: Vec<(GridParam, f64)> = self
            .group_by
            .iter()
            .map(|&p| (p, p.value(&run.cell)))
            .collect();
        let bits = key.iter().map(|(_, v)| v.to_bits()).collect();
        let slot = *self.index.entry(bits).or_insert_with(|| {
            self.groups.push((key, Vec::new()));
            self.groups.len() - 1
        });
        let series = &mut self.groups[slot].1;
        let values = run.metrics.iter().map(|m| m.avg_gl_companies);
        if series.is_empty() {
            series.extend(values.map(|v| vec![v]));
        } else {
            for (s, v) in series.iter_mut().zip(values) {
                s.push(v);
            }
        }
    }

    /// Groups in order of first appearance.
    pub fn finish(self) -> Vec<GroupSummary> {
        self.groups
            .into_iter()
            .map(|(key, series)| {
                let step_mean: Vec<f64> = series.iter().map(|s| mean(s)).collect();
                let step_std = series
                    .iter()
                    .zip(&step_mean)
                    .map(|(s, &m)| sample_std(s, m))
                    .collect();
                let last = series.last().map(Vec::as_slice).unwrap_or(&[]);
                GroupSummary {
                    key,
                    n_runs: last.len(),
                    final_mean: step_mean.last().copied().unwrap_or(0.0),
                    final_std: sample_std(last, step_mean.last().copied().unwrap_or(0.0)),
                    step_mean,
                    step_std,
                }
            })
            .collect()
    }
}

/// Groups runs by the given grid dimensions (all runs pooled when empty).
pub fn aggregate(result: &SweepResult, group_by: &[GridParam]) -> Vec<GroupSummary> {
    let mut agg = Aggregator::new(group_by);
    for run in &result.runs {
        agg.push(run);
    }
    agg.finish()
}
