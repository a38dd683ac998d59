use rand::Rng;

use super::{Edge, NetworkConfig};
use crate::error::{Error, Result};

/// Preferential-attachment company layer in which larger firms join first.
///
/// The `ba_m + 1` largest firms form a clique. The remaining firms join in
/// decreasing size order (ties by ascending index) and each links to `ba_m`
/// distinct earlier firms chosen with probability proportional to their
/// current degree.
pub fn generate_company_layer<R: Rng + ?Sized>(
    firm_sizes: &[f64],
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<Vec<Edge>> {
    let n = firm_sizes.len();
    let m = cfg.ba_m;
    if m == 0 || n <= m {
        return Err(Error::config("ba_m", "must be in [1, n_firms)"));
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        firm_sizes[b as usize]
            .total_cmp(&firm_sizes[a as usize])
            .then(a.cmp(&b))
    });

    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // Each edge contributes both endpoints; uniform picks from this list are
    // degree-proportional.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * edges.capacity());

    for i in 0..=m {
        for j in i + 1..=m {
            let (a, b) = (order[i], order[j]);
            edges.push((a.min(b), a.max(b)));
            endpoints.extend([a, b]);
        }
    }

    let mut targets = Vec::with_capacity(m);
    for &node in &order[m + 1..] {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((node.min(t), node.max(t)));
            endpoints.extend([node, t]);
        }
    }
    edges.sort_unstable();
    Ok(edges)
}
