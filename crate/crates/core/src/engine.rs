//! Threshold diffusion of greening levels with external influence on banks.
//!
//! Each iteration runs, in order:
//!
//! 1. external influence: while `step < eit`, every selected bank gains
//!    `delta` with probability `alpha` (applied immediately);
//! 2. bank layer pass for banks;
//! 3. interlayer pass for banks;
//! 4. company layer pass for firms;
//! 5. interlayer pass for firms;
//! 6. all increments collected by passes 2-5 are applied together.
//!
//! Passes 2-5 read the greening levels frozen after step 1. A node whose
//! degree-weighted neighbour level strictly exceeds `lt` gains `delta` per
//! pass, so a node can gain `2 * delta` in one iteration. Levels are capped at 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{compute_step_metrics, StepMetrics};
use crate::netgen::{Layer, MultilayerNetwork};
use crate::seed::{rng_from_seed, SimRng};

/// Diffusion parameters of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpreadParams {
    /// Starting greening level of every node.
    pub sgl: f64,
    /// Success probability of one external influence attempt.
    pub alpha: f64,
    /// Greening level increase per successful attempt or threshold crossing.
    pub delta: f64,
    /// Probability that a bank is selected for external influence.
    pub eip: f64,
    /// Number of initial steps with external influence.
    pub eit: u32,
    /// Number of simulation steps.
    pub ss: u32,
    /// Linear threshold.
    pub lt: f64,
    pub seed: u64,
}

impl Default for SpreadParams {
    fn default() -> Self {
        SpreadParams {
            sgl: 0.0,
            alpha: 0.1,
            delta: 0.1,
            eip: 1.0,
            eit: 15,
            ss: 100,
            lt: 0.1,
            seed: 0,
        }
    }
}

fn check_unit(key: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be in [0,1], got {value}")))
    }
}

impl SpreadParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("sgl", self.sgl)?;
        check_unit("alpha", self.alpha)?;
        check_unit("delta", self.delta)?;
        check_unit("eip", self.eip)?;
        check_unit("lt", self.lt)?;
        Ok(())
    }
}

/// Greening levels of all nodes, banks first.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    gl: Vec<f64>,
    n_banks: usize,
    influenced_banks: Vec<u32>,
    step: u32,
}

impl SimulationState {
    pub fn gl(&self) -> &[f64] {
        &self.gl
    }

    pub fn bank_gl(&self) -> &[f64] {
        &self.gl[..self.n_banks]
    }

    pub fn firm_gl(&self) -> &[f64] {
        &self.gl[self.n_banks..]
    }

    /// Banks selected for external influence, ascending.
    pub fn influenced_banks(&self) -> &[u32] {
        &self.influenced_banks
    }

    pub fn step(&self) -> u32 {
        self.step
    }
}

/// Uniform draw in `[0, 1)` compared against `p`; `p = 1` always succeeds and
/// `p = 0` never does.
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.gen::<f64>() < p
}

/// Sets every level to `sgl` and selects the influenced banks with one draw
/// per bank in ascending id order.
pub fn init_state<R: Rng + ?Sized>(
    net: &MultilayerNetwork,
    params: &SpreadParams,
    rng: &mut R,
) -> SimulationState {
    let influenced_banks = (0..net.n_banks() as u32)
        .filter(|_| bernoulli(rng, params.eip))
        .collect();
    SimulationState {
        gl: vec![params.sgl; net.n_nodes()],
        n_banks: net.n_banks(),
        influenced_banks,
        step: 0,
    }
}

/// Global node index offsets of the sources and targets of a layer view.
fn offsets(net: &MultilayerNetwork, layer: Layer) -> (usize, usize) {
    let nb = net.n_banks();
    match layer {
        Layer::Bank => (0, 0),
        Layer::InterlayerFromBanks => (0, nb),
        Layer::Company => (nb, nb),
        Layer::InterlayerFromFirms => (nb, 0),
    }
}

/// Degree-weighted neighbour level `L_v = sum_j d_j * gl_j` of node `v`
/// (local id: bank id for bank-sourced layers, firm id otherwise). Zero for
/// an empty neighbourhood.
pub fn neighbor_influence(net: &MultilayerNetwork, layer: Layer, v: usize, gl: &[f64]) -> f64 {
    let adj = net.adjacency(layer);
    let (_, target_offset) = offsets(net, layer);
    adj.neighbors(v)
        .iter()
        .zip(adj.weights(v))
        .map(|(&j, &d)| d * gl[target_offset + j as usize])
        .sum()
}

/// Each influenced bank, in ascending id order, gains `delta` with
/// probability `alpha`.
pub fn external_influence_substep<R: Rng + ?Sized>(
    state: &mut SimulationState,
    params: &SpreadParams,
    rng: &mut R,
) {
    for &b in &state.influenced_banks {
        if bernoulli(rng, params.alpha) {
            let g = &mut state.gl[b as usize];
            *g = (*g + params.delta).min(1.0);
        }
    }
}

/// Number of `delta` increments owed to each node (global index) after the
/// diffusion passes of one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingIncrements {
    counts: Vec<u8>,
}

impl PendingIncrements {
    pub fn new(n_nodes: usize) -> Self {
        PendingIncrements {
            counts: vec![0; n_nodes],
        }
    }

    pub fn add(&mut self, node: usize) {
        self.counts[node] += 1;
    }

    pub fn count(&self, node: usize) -> u8 {
        self.counts[node]
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// `(node, count)` for every node with at least one increment.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v, c))
    }
}

/// Nodes (global index) whose neighbour level in `layer` strictly exceeds `lt`.
pub fn diffusion_pass(net: &MultilayerNetwork, layer: Layer, gl: &[f64], lt: f64) -> Vec<usize> {
    let (source_offset, _) = offsets(net, layer);
    (0..net.adjacency(layer).len())
        .filter(|&v| neighbor_influence(net, layer, v, gl) > lt)
        .map(|v| source_offset + v)
        .collect()
}

/// Runs the given passes against the current levels without modifying them.
pub fn diffusion_substeps_in_order(
    state: &SimulationState,
    params: &SpreadParams,
    net: &MultilayerNetwork,
    passes: &[Layer],
) -> PendingIncrements {
    let mut pending = PendingIncrements::new(state.gl.len());
    for &layer in passes {
        for v in diffusion_pass(net, layer, &state.gl, params.lt) {
            pending.add(v);
        }
    }
    pending
}

/// The four diffusion passes of one iteration.
pub fn diffusion_substeps(
    state: &SimulationState,
    params: &SpreadParams,
    net: &MultilayerNetwork,
) -> PendingIncrements {
    diffusion_substeps_in_order(state, params, net, &Layer::ALL)
}

fn apply(state: &mut SimulationState, pending: &PendingIncrements, delta: f64) -> bool {
    let mut changed = false;
    for (v, k) in pending.iter() {
        let g = &mut state.gl[v];
        let next = (*g + f64::from(k) * delta).min(1.0);
        changed |= next != *g;
        *g = next;
    }
    changed
}

/// Advances the state by one iteration.
pub fn step<R: Rng + ?Sized>(
    state: &mut SimulationState,
    params: &SpreadParams,
    net: &MultilayerNetwork,
    rng: &mut R,
) {
    if state.step < params.eit {
        external_influence_substep(state, params, rng);
    }
    let pending = diffusion_substeps(state, params, net);
    apply(state, &pending, params.delta);
    state.step += 1;
}

/// A single simulation over a shared network.
///
/// Once external influence has ended and an iteration leaves every level
/// unchanged, the state is a fixed point and later iterations only advance
/// the step counter.
pub struct Simulation<'a> {
    net: &'a MultilayerNetwork,
    params: SpreadParams,
    state: SimulationState,
    rng: SimRng,
    settled: bool,
}

impl<'a> Simulation<'a> {
    pub fn new(net: &'a MultilayerNetwork, params: SpreadParams) -> Result<Self> {
        params.validate()?;
        let mut rng = rng_from_seed(params.seed);
        let state = init_state(net, &params, &mut rng);
        Ok(Simulation {
            net,
            params,
            state,
            rng,
            settled: false,
        })
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn params(&self) -> &SpreadParams {
        &self.params
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.params.ss
    }

    pub fn metrics(&self) -> StepMetrics {
        compute_step_metrics(&self.state, self.net)
    }

    /// Advances one iteration. Returns `false` once `ss` steps have run.
    pub fn advance(&mut self) -> bool {
        if self.is_finished() {
            return false;
        }
        if self.settled {
            self.state.step += 1;
            return true;
        }
        let influenced = self.state.step < self.params.eit;
        if influenced {
            external_influence_substep(&mut self.state, &self.params, &mut self.rng);
        }
        let pending = diffusion_substeps(&self.state, &self.params, self.net);
        let changed = apply(&mut self.state, &pending, self.params.delta);
        self.state.step += 1;
        // Without influence the dynamics are deterministic, so an unchanged
        // state stays unchanged.
        self.settled = !influenced && !changed;
        true
    }
}

/// Result of one simulation: metrics after initialization and after every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: SpreadParams,
    pub seed: u64,
    pub metrics: Vec<StepMetrics>,
    /// Full level vectors per step, banks first, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub states: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn final_metrics(&self) -> &StepMetrics {
        self.metrics
            .last()
            .expect("trajectory has a step-0 snapshot")
    }
}

pub fn run_simulation(net: &MultilayerNetwork, params: &SpreadParams) -> Result<Trajectory> {
    simulate(net, params, false)
}

/// Like [`run_simulation`] but also keeps every level vector.
pub fn run_simulation_with_states(
    net: &MultilayerNetwork,
    params: &SpreadParams,
) -> Result<Trajectory> {
    simulate(net, params, true)
}

fn simulate(
    net: &MultilayerNetwork,
    params: &SpreadParams,
    keep_states: bool,
) -> Result<Trajectory> {
    let mut sim = Simulation::new(net, *params)?;
    let len = params.ss as usize + 1;
    let mut metrics = Vec::with_capacity(len);
    let mut states = keep_states.then(|| Vec::with_capacity(len));
    metrics.push(sim.metrics());
    if let Some(s) = states.as_mut() {
        s.push(sim.state().gl().to_vec());
    }
    while sim.advance() {
        metrics.push(sim.metrics());
        if let Some(s) = states.as_mut() {
            s.push(sim.state().gl().to_vec());
        }
    }
    Ok(Trajectory {
        params: *params,
        seed: params.seed,
        metrics,
        states,
    })
}
