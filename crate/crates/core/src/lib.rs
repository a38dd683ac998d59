//! Seed-reproducible simulation of green-behaviour diffusion on multilayer
//! bank-company networks.
//!
//! - [`netgen`] builds the bank layer, company layer and interlayer.
//! - [`engine`] runs the threshold diffusion with external influence on banks.
//! - [`metrics`] computes per-step aggregates.
//! - [`sweep`] runs replicated parameter grids in parallel.
//! - [`io`] parses configurations and reads/writes result tables.

pub mod engine;
pub mod error;
pub mod io;
pub mod metrics;
pub mod netgen;
pub mod seed;
pub mod sweep;

pub use engine::{run_simulation, Simulation, SimulationState, SpreadParams, Trajectory};
pub use error::{Error, Result};
pub use metrics::StepMetrics;
pub use netgen::{assemble_network, Layer, MultilayerNetwork, NetworkConfig};
pub use sweep::{aggregate, run_sweep, GridParam, GridSpec, SweepResult};
