//! Fixtures shared by the criterion benchmarks in `benches/`.

use greenspread::{GridSpec, SpreadParams};

/// A 16-cell grid with two replicates and 30 steps per run.
pub fn small_grid() -> GridSpec {
    GridSpec {
        alphas: vec![0.05, 0.1],
        deltas: vec![0.1],
        eips: vec![0.5, 1.0],
        eits: vec![5, 15],
        lts: vec![0.1, 0.3],
        ss: 30,
        replicates: 2,
        ..GridSpec::default()
    }
}

/// Default parameters with a shorter horizon.
pub fn short_run(ss: u32) -> SpreadParams {
    SpreadParams {
        ss,
        ..SpreadParams::default()
    }
}
