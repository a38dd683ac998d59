use rand::Rng;

use super::{BankProfile, Edge, NetworkConfig};
use crate::error::{Error, Result};

/// Expected mean degree of the fitness model with scale `c` over `weights`
/// (weights already normalized to sum to one).
pub fn expected_bank_mean_degree(weights: &[f64], c: f64) -> f64 {
    let n = weights.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += (c * weights[i] * weights[j]).min(1.0);
        }
    }
    2.0 * total / n as f64
}

/// Finds the scale `c` for which `p_ij = min(1, c * w_i * w_j)` has the
/// requested expected mean degree.
pub fn calibrate_bank_layer(assets: &[f64], target_mean_degree: f64) -> Result<f64> {
    let n = assets.len();
    if n < 2 {
        return Err(Error::config("n_banks", "must be at least 2"));
    }
    let max_degree = (n - 1) as f64;
    if !(target_mean_degree > 0.0 && target_mean_degree <= max_degree) {
        return Err(Error::config(
            "bank_mean_degree",
            format!("must be in (0, n_banks - 1] = (0, {max_degree}]"),
        ));
    }
    let total: f64 = assets.iter().sum();
    let weights: Vec<f64> = assets.iter().map(|a| a / total).collect();

    if target_mean_degree == max_degree {
        // Saturate every pair.
        let min_product = weights
            .iter()
            .enumerate()
            .flat_map(|(i, wi)| weights[i + 1..].iter().map(move |wj| wi * wj))
            .fold(f64::INFINITY, f64::min);
        return Ok(2.0 / min_product);
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    while expected_bank_mean_degree(&weights, hi) < target_mean_degree {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if expected_bank_mean_degree(&weights, mid) < target_mean_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Draws the interbank layer: each pair `i < j` is linked independently with
/// probability `min(1, c * A_i * A_j / (sum A)^2)`, pairs visited in
/// lexicographic order.
pub fn generate_bank_layer<R: Rng + ?Sized>(
    profiles: &[BankProfile],
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<Vec<Edge>> {
    let assets: Vec<f64> = profiles.iter().map(|p| p.assets).collect();
    let c = calibrate_bank_layer(&assets, cfg.bank_mean_degree)?;
    let total: f64 = assets.iter().sum();
    let weights: Vec<f64> = assets.iter().map(|a| a / total).collect();

    let n = profiles.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = (c * weights[i] * weights[j]).min(1.0);
            let u: f64 = rng.gen();
            if u < p {
                edges.push((i as u32, j as u32));
            }
        }
    }
    Ok(edges)
}
