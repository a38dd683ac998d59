//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p greenspread-core --test acceptance -- --nocapture --test-threads 1`
//! to see them.

use std::time::{Duration, Instant};

use greenspread::engine::{run_simulation_with_states, Simulation, SpreadParams};
use greenspread::io::{OutputFormat, ResultWriter};
use greenspread::netgen::{assemble_network, Layer, MultilayerNetwork, NetworkConfig};
use greenspread::sweep::{aggregate, enumerate_cells, run_sweep, GridParam, GridSpec, SweepResult};
use rayon::prelude::*;

mod common;
use common::Reference;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!(
        "[{}] AC{id} {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "AC{id} {name} failed: {detail}");
}

/// Three banks and five firms, every firm borrowing from two banks.
fn hand_built() -> MultilayerNetwork {
    let cfg = NetworkConfig {
        n_banks: 3,
        n_firms: 5,
        lambda_f: 2,
        bank_mean_degree: 1.0,
        ba_m: 1,
        ..NetworkConfig::default()
    };
    MultilayerNetwork::from_edges(
        cfg,
        vec![3.0, 1.0, 2.0],
        vec![(0, 1), (1, 2)],
        vec![(0, 1), (1, 2), (2, 3), (0, 4)],
        vec![
            (0, 0),
            (1, 0),
            (0, 1),
            (2, 1),
            (1, 2),
            (2, 2),
            (0, 3),
            (1, 3),
            (1, 4),
            (2, 4),
        ],
    )
    .unwrap()
}

#[test]
fn ac1_oracle_equivalence() {
    let start = Instant::now();
    let net = hand_built();
    let reference = Reference::new(&net);
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for alpha in [0.0, 1.0] {
        for eit in [0, 1, 2] {
            let params = SpreadParams {
                sgl: 0.0,
                alpha,
                delta: 0.1,
                eip: 1.0,
                eit,
                ss: 10,
                lt: 0.05,
                seed: 17,
            };
            let engine = run_simulation_with_states(&net, &params)
                .unwrap()
                .states
                .unwrap();
            let oracle = reference.run(alpha, 0.1, eit, 0.05, 10);
            assert_eq!(engine.len(), oracle.len());
            for (step, (e, (ob, of))) in engine.iter().zip(&oracle).enumerate() {
                let expected: Vec<f64> = ob.iter().chain(of).copied().collect();
                compared += 1;
                if *e != expected {
                    mismatches.push(format!(
                        "alpha={alpha} eit={eit} step={step}: {e:?} vs {expected:?}"
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "oracle equivalence",
        mismatches.is_empty() && elapsed < Duration::from_secs(1),
        format!(
            "{compared} snapshots compared, {} mismatches, {elapsed:?}",
            mismatches.len()
        ),
    );
}

#[test]
fn ac2_null_sources() {
    let start = Instant::now();
    let base = SpreadParams {
        sgl: 0.0,
        alpha: 0.1,
        delta: 0.1,
        eip: 1.0,
        eit: 15,
        ss: 100,
        lt: 0.05,
        seed: 0,
    };
    let variants = [
        SpreadParams { eit: 0, ..base },
        SpreadParams { alpha: 0.0, ..base },
        SpreadParams { delta: 0.0, ..base },
        SpreadParams { eip: 0.0, ..base },
    ];
    let failures: usize = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let net = assemble_network(&NetworkConfig::desk().with_seed(s)).unwrap();
            variants
                .iter()
                .filter(|p| {
                    let mut sim = Simulation::new(&net, SpreadParams { seed: s, ..**p }).unwrap();
                    let mut zero = sim.state().gl().iter().all(|&g| g == 0.0);
                    while sim.advance() {
                        zero &= sim.state().gl().iter().all(|&g| g == 0.0);
                    }
                    !zero
                })
                .count()
        })
        .sum();
    let elapsed = start.elapsed();
    report(
        2,
        "null-source suite",
        failures == 0 && elapsed < Duration::from_secs(10),
        format!("400 runs on 100 networks, {failures} non-zero, {elapsed:?}"),
    );
}

#[test]
fn ac3_bounds_and_monotonicity() {
    let start = Instant::now();
    let net = assemble_network(&NetworkConfig::desk().with_seed(3)).unwrap();
    let grid = GridSpec {
        replicates: 5,
        base_seed: 3,
        ..GridSpec::default()
    };
    let cells = enumerate_cells(&grid).unwrap();
    let units: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..5).map(move |r| (c, r)))
        .collect();
    let violations: usize = units
        .par_iter()
        .map(|&(c, r)| {
            let mut sim = Simulation::new(&net, grid.params(&cells[c], r)).unwrap();
            let mut prev = sim.state().gl().to_vec();
            let mut bad = prev.iter().filter(|g| !(0.0..=1.0).contains(*g)).count();
            while sim.advance() {
                let gl = sim.state().gl();
                bad += gl
                    .iter()
                    .zip(&prev)
                    .filter(|(g, p)| !(0.0..=1.0).contains(*g) || g < p)
                    .count();
                prev.copy_from_slice(gl);
            }
            bad
        })
        .sum();
    let elapsed = start.elapsed();
    report(
        3,
        "bounds and monotonicity",
        violations == 0 && elapsed < Duration::from_secs(300),
        format!(
            "{} runs x 101 snapshots, {violations} violations, {elapsed:?}",
            units.len()
        ),
    );
}

/// Checks that group means follow `increasing` (or decreasing) order, allowing
/// reversals within two standard errors of the difference.
fn ordered(result: &SweepResult, param: GridParam, increasing: bool) -> (bool, String) {
    let groups = aggregate(result, &[param]);
    let mut ok = true;
    let mut detail = Vec::new();
    for w in groups.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let diff = if increasing {
            b.final_mean - a.final_mean
        } else {
            a.final_mean - b.final_mean
        };
        let se = (a.final_sem().powi(2) + b.final_sem().powi(2)).sqrt();
        if diff < -2.0 * se {
            ok = false;
        }
        detail.push(format!("{:.4}", a.final_mean));
    }
    detail.push(format!("{:.4}", groups.last().unwrap().final_mean));
    (ok, format!("{param}: [{}]", detail.join(", ")))
}

#[test]
fn ac4_parameter_monotonicity() {
    let start = Instant::now();
    let net = assemble_network(&NetworkConfig::desk().with_seed(4)).unwrap();
    let grid = GridSpec {
        replicates: 30,
        base_seed: 4,
        ..GridSpec::default()
    };
    let result = run_sweep(&grid, &net, rayon::current_num_threads()).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for (param, increasing) in [
        (GridParam::Alpha, true),
        (GridParam::Delta, true),
        (GridParam::Eip, true),
        (GridParam::Eit, true),
        (GridParam::Lt, false),
    ] {
        let (good, line) = ordered(&result, param, increasing);
        ok &= good;
        lines.push(line);
    }
    report(
        4,
        "stochastic parameter monotonicity",
        ok,
        format!("{} ({:?})", lines.join("; "), start.elapsed()),
    );
}

#[test]
fn ac5_low_threshold_saturation() {
    let net = assemble_network(&NetworkConfig::default()).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for (eit, seed) in [(2, 1), (2, 2), (5, 3), (15, 4)] {
        let start = Instant::now();
        let params = SpreadParams {
            sgl: 0.0,
            alpha: 0.1,
            delta: 0.1,
            eip: 1.0,
            eit,
            ss: 100,
            lt: 0.05,
            seed,
        };
        let t = greenspread::run_simulation(&net, &params).unwrap();
        let elapsed = start.elapsed();
        let last = t.final_metrics().avg_gl_companies;
        let crossing = t.metrics.iter().position(|m| m.avg_gl_companies > 0.9);
        ok &= last >= 0.9 && crossing.is_some_and(|s| s < 50) && elapsed < Duration::from_secs(120);
        lines.push(format!(
            "eit={eit}: final {last:.4}, >0.9 at step {crossing:?}, {elapsed:?}"
        ));
    }
    report(5, "low-threshold saturation", ok, lines.join("; "));
}

#[test]
fn ac6_high_threshold_suppression() {
    let net = assemble_network(&NetworkConfig::desk().with_seed(6)).unwrap();
    let pooled_mean = |delta: f64| {
        let grid = GridSpec {
            alphas: vec![0.05],
            deltas: vec![delta],
            lts: vec![0.25],
            replicates: 30,
            base_seed: 6,
            ..GridSpec::default()
        };
        let r = run_sweep(&grid, &net, rayon::current_num_threads()).unwrap();
        aggregate(&r, &[])[0].final_mean
    };
    let low = pooled_mean(0.05);
    let high = pooled_mean(0.1);
    report(
        6,
        "high-threshold suppression",
        low < 0.05 && high > low && high >= 2.0 * low,
        format!("delta=0.05: {low:.6}, delta=0.1: {high:.6}"),
    );
}

#[test]
fn ac7_arithmetic_identities() {
    let cells = enumerate_cells(&GridSpec::default()).unwrap().len();
    let net = assemble_network(&NetworkConfig::default()).unwrap();
    let ba_edges = net.firm_edges().len();
    let single = assemble_network(&NetworkConfig {
        lambda_f: 1,
        ..NetworkConfig::default()
    })
    .unwrap();
    let total: usize = (0..single.n_banks())
        .map(|b| single.degree(Layer::InterlayerFromBanks, b))
        .sum();
    let mean_degree = total as f64 / single.n_banks() as f64;
    report(
        7,
        "arithmetic identities",
        cells == 1200 && ba_edges == 29_994 && mean_degree == 40.0,
        format!("cells {cells}, BA edges {ba_edges}, mean bank interlayer degree {mean_degree}"),
    );
}

fn sweep_csv(grid: &GridSpec, net: &MultilayerNetwork, threads: usize) -> Vec<u8> {
    let result = run_sweep(grid, net, threads).unwrap();
    let mut w = ResultWriter::new(Vec::new(), OutputFormat::Csv).unwrap();
    for row in result.rows() {
        w.write_row(&row).unwrap();
    }
    w.into_inner().unwrap()
}

#[test]
fn ac8_determinism() {
    let net = assemble_network(&NetworkConfig::desk().with_seed(8)).unwrap();
    let grid = GridSpec {
        replicates: 2,
        base_seed: 8,
        ..GridSpec::default()
    };
    let one = sweep_csv(&grid, &net, 1);
    let eight = sweep_csv(&grid, &net, 8);
    let again = sweep_csv(&grid, &net, 8);
    report(
        8,
        "determinism",
        one == eight && eight == again,
        format!(
            "{} bytes, threads 1 vs 8 equal: {}, repeat equal: {}",
            one.len(),
            one == eight,
            eight == again
        ),
    );
}
