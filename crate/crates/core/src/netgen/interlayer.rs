use rand::Rng;

use super::{Edge, NetworkConfig};
use crate::error::Result;

/// Bank-firm loan links together with the firm sizes they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct Interlayer {
    /// `(bank, firm)` pairs sorted lexicographically.
    pub edges: Vec<Edge>,
    pub firm_sizes: Vec<f64>,
}

/// Size of a loan from a bank with balance sheet `assets`:
/// `theta_bar * A_i * N_b / N_f`.
pub fn loan_size(assets: f64, cfg: &NetworkConfig) -> f64 {
    cfg.theta_bar * assets * cfg.n_banks as f64 / cfg.n_firms as f64
}

/// Each firm picks `lambda_f` distinct banks, sampled one after another with
/// probability proportional to bank assets among the banks not yet picked.
pub fn generate_interlayer<R: Rng + ?Sized>(
    assets: &[f64],
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<Interlayer> {
    cfg.validate()?;
    let total: f64 = assets.iter().sum();
    let mut edges = Vec::with_capacity(cfg.n_firms * cfg.lambda_f);
    let mut picked = vec![false; assets.len()];
    let mut chosen = Vec::with_capacity(cfg.lambda_f);

    for firm in 0..cfg.n_firms {
        let mut remaining = total;
        chosen.clear();
        for _ in 0..cfg.lambda_f {
            let target = rng.gen::<f64>() * remaining;
            let mut acc = 0.0;
            let mut pick = None;
            for (bank, &a) in assets.iter().enumerate() {
                if picked[bank] {
                    continue;
                }
                acc += a;
                pick = Some(bank);
                if target < acc {
                    break;
                }
            }
            // Falls through to the last free bank when rounding leaves
            // `target` at the top of the range.
            let bank = pick.expect("lambda_f <= n_banks leaves a free bank");
            picked[bank] = true;
            remaining -= assets[bank];
            chosen.push(bank);
        }
        for &bank in &chosen {
            picked[bank] = false;
            edges.push((bank as u32, firm as u32));
        }
    }
    edges.sort_unstable();
    let firm_sizes = firm_sizes(&edges, assets, cfg);
    Ok(Interlayer { edges, firm_sizes })
}

/// Sum of loan sizes per firm, accumulated in sorted edge order.
pub(crate) fn firm_sizes(sorted_edges: &[Edge], assets: &[f64], cfg: &NetworkConfig) -> Vec<f64> {
    let mut sizes = vec![0.0; cfg.n_firms];
    for &(bank, firm) in sorted_edges {
        sizes[firm as usize] += loan_size(assets[bank as usize], cfg);
    }
    sizes
}
