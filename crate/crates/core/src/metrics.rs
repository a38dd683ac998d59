//! Aggregate observables of a simulation state.

use serde::{Deserialize, Serialize};

use crate::engine::SimulationState;
use crate::netgen::MultilayerNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: u32,
    pub avg_gl_companies: f64,
    pub avg_gl_banks: f64,
    /// Share of firms with a greening level above zero.
    pub frac_influenced_companies: f64,
    pub frac_influenced_banks: f64,
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        compensated_sum(values) / values.len() as f64
    }
}

/// Fraction of `values` strictly above `threshold`.
pub fn fraction_above(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
}

/// Metrics of a level vector laid out banks first.
pub fn metrics_from_levels(step: u32, n_banks: usize, gl: &[f64]) -> StepMetrics {
    let (banks, firms) = gl.split_at(n_banks);
    StepMetrics {
        step,
        avg_gl_companies: mean(firms),
        avg_gl_banks: mean(banks),
        frac_influenced_companies: fraction_above(firms, 0.0),
        frac_influenced_banks: fraction_above(banks, 0.0),
    }
}

pub fn compute_step_metrics(state: &SimulationState, net: &MultilayerNetwork) -> StepMetrics {
    metrics_from_levels(state.step(), net.n_banks(), state.gl())
}
