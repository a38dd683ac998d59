use std::path::Path;

use serde::{Deserialize, Serialize};

use super::interlayer::firm_sizes;
use super::{
    build_bank_profiles, generate_bank_assets, generate_bank_layer, generate_company_layer,
    generate_interlayer, BankProfile, Edge, NetworkConfig, Stage,
};
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Neighbourhood selector. The interlayer can be read from either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// Bank to bank.
    Bank,
    /// Firm to firm.
    Company,
    /// Bank to the firms it lends to.
    InterlayerFromBanks,
    /// Firm to the banks it borrows from.
    InterlayerFromFirms,
}

impl Layer {
    pub const ALL: [Layer; 4] = [
        Layer::Bank,
        Layer::InterlayerFromBanks,
        Layer::Company,
        Layer::InterlayerFromFirms,
    ];
}

/// Compressed adjacency of one edge-set view.
///
/// Next to every neighbour id it stores the neighbour's normalized degree
/// `deg(j) / sum_{k in N(v)} deg(k)`, with degrees taken within the same
/// edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
}

impl Adjacency {
    /// `edges` are `(source, target)` pairs, `target_degree` is indexed by target id.
    fn build(n_sources: usize, edges: &[(u32, u32)], target_degree: &[usize]) -> Self {
        let mut offsets = vec![0usize; n_sources + 1];
        for &(s, _) in edges {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n_sources {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n_sources]];
        for &(s, t) in edges {
            neighbors[cursor[s as usize]] = t;
            cursor[s as usize] += 1;
        }
        let mut weights = vec![0.0; neighbors.len()];
        for v in 0..n_sources {
            let range = offsets[v]..offsets[v + 1];
            neighbors[range.clone()].sort_unstable();
            let total: usize = neighbors[range.clone()]
                .iter()
                .map(|&j| target_degree[j as usize])
                .sum();
            for k in range {
                weights[k] = target_degree[neighbors[k] as usize] as f64 / total as f64;
            }
        }
        Adjacency {
            offsets,
            neighbors,
            weights,
        }
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable bank layer, company layer and interlayer.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerNetwork {
    config: NetworkConfig,
    bank_profiles: Vec<BankProfile>,
    firm_sizes: Vec<f64>,
    bank_edges: Vec<Edge>,
    firm_edges: Vec<Edge>,
    interlayer_edges: Vec<Edge>,
    bank_layer: Adjacency,
    company_layer: Adjacency,
    bank_to_firms: Adjacency,
    firm_to_banks: Adjacency,
}

/// On-disk form of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub config: NetworkConfig,
    pub bank_edges: Vec<[u32; 2]>,
    pub firm_edges: Vec<[u32; 2]>,
    pub interlayer_edges: Vec<[u32; 2]>,
    pub assets: Vec<f64>,
    pub firm_sizes: Vec<f64>,
}

fn check_simple(name: &str, edges: &mut [Edge], n: usize) -> Result<()> {
    for e in edges.iter_mut() {
        if e.0 == e.1 {
            return Err(Error::Network(format!("{name}: self-loop on node {}", e.0)));
        }
        if e.0.max(e.1) as usize >= n {
            return Err(Error::Network(format!(
                "{name}: edge {e:?} out of range 0..{n}"
            )));
        }
        *e = (e.0.min(e.1), e.0.max(e.1));
    }
    edges.sort_unstable();
    if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Network(format!("{name}: duplicate edge {:?}", w[0])));
    }
    Ok(())
}

fn degrees(n: usize, endpoints: impl Iterator<Item = u32>) -> Vec<usize> {
    let mut deg = vec![0; n];
    for v in endpoints {
        deg[v as usize] += 1;
    }
    deg
}

impl MultilayerNetwork {
    /// Builds a network from explicit edge lists, checking every structural
    /// invariant. Firm sizes and bank profiles are derived from `assets`.
    pub fn from_edges(
        config: NetworkConfig,
        assets: Vec<f64>,
        mut bank_edges: Vec<Edge>,
        mut firm_edges: Vec<Edge>,
        mut interlayer_edges: Vec<Edge>,
    ) -> Result<Self> {
        config.validate()?;
        let (nb, nf) = (config.n_banks, config.n_firms);
        if assets.len() != nb {
            return Err(Error::Network(format!(
                "expected {nb} bank assets, got {}",
                assets.len()
            )));
        }
        if let Some(a) = assets.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Network(format!(
                "bank assets must be positive, got {a}"
            )));
        }
        check_simple("bank_edges", &mut bank_edges, nb)?;
        check_simple("firm_edges", &mut firm_edges, nf)?;

        for &(b, f) in &interlayer_edges {
            if b as usize >= nb || f as usize >= nf {
                return Err(Error::Network(format!(
                    "interlayer_edges: edge ({b}, {f}) out of range"
                )));
            }
        }
        interlayer_edges.sort_unstable();
        if let Some(w) = interlayer_edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Network(format!(
                "interlayer_edges: duplicate edge {:?}",
                w[0]
            )));
        }

        let bank_deg = degrees(nb, bank_edges.iter().flat_map(|&(a, b)| [a, b]));
        let firm_deg = degrees(nf, firm_edges.iter().flat_map(|&(a, b)| [a, b]));
        let bank_il_deg = degrees(nb, interlayer_edges.iter().map(|e| e.0));
        let firm_il_deg = degrees(nf, interlayer_edges.iter().map(|e| e.1));
        if let Some(f) = firm_il_deg.iter().position(|&d| d != config.lambda_f) {
            return Err(Error::Network(format!(
                "firm {f} has {} interlayer links, expected lambda_f = {}",
                firm_il_deg[f], config.lambda_f
            )));
        }

        let both_ways = |edges: &[Edge]| -> Vec<Edge> {
            edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect()
        };
        let reversed: Vec<Edge> = interlayer_edges.iter().map(|&(b, f)| (f, b)).collect();
        let bank_layer = Adjacency::build(nb, &both_ways(&bank_edges), &bank_deg);
        let company_layer = Adjacency::build(nf, &both_ways(&firm_edges), &firm_deg);
        let bank_to_firms = Adjacency::build(nb, &interlayer_edges, &firm_il_deg);
        let firm_to_banks = Adjacency::build(nf, &reversed, &bank_il_deg);

        let firm_sizes = firm_sizes(&interlayer_edges, &assets, &config);
        let bank_profiles = build_bank_profiles(&assets, &config);
        Ok(MultilayerNetwork {
            config,
            bank_profiles,
            firm_sizes,
            bank_edges,
            firm_edges,
            interlayer_edges,
            bank_layer,
            company_layer,
            bank_to_firms,
            firm_to_banks,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn n_banks(&self) -> usize {
        self.config.n_banks
    }

    pub fn n_firms(&self) -> usize {
        self.config.n_firms
    }

    /// Banks first, then firms.
    pub fn n_nodes(&self) -> usize {
        self.n_banks() + self.n_firms()
    }

    pub fn bank_profiles(&self) -> &[BankProfile] {
        &self.bank_profiles
    }

    pub fn assets(&self) -> impl Iterator<Item = f64> + '_ {
        self.bank_profiles.iter().map(|p| p.assets)
    }

    pub fn firm_sizes(&self) -> &[f64] {
        &self.firm_sizes
    }

    pub fn bank_edges(&self) -> &[Edge] {
        &self.bank_edges
    }

    pub fn firm_edges(&self) -> &[Edge] {
        &self.firm_edges
    }

    /// `(bank, firm)` pairs.
    pub fn interlayer_edges(&self) -> &[Edge] {
        &self.interlayer_edges
    }

    pub fn adjacency(&self, layer: Layer) -> &Adjacency {
        match layer {
            Layer::Bank => &self.bank_layer,
            Layer::Company => &self.company_layer,
            Layer::InterlayerFromBanks => &self.bank_to_firms,
            Layer::InterlayerFromFirms => &self.firm_to_banks,
        }
    }

    pub fn degree(&self, layer: Layer, v: usize) -> usize {
        self.adjacency(layer).degree(v)
    }

    pub fn to_file(&self) -> NetworkFile {
        let pairs = |e: &[Edge]| e.iter().map(|&(a, b)| [a, b]).collect();
        NetworkFile {
            config: self.config.clone(),
            bank_edges: pairs(&self.bank_edges),
            firm_edges: pairs(&self.firm_edges),
            interlayer_edges: pairs(&self.interlayer_edges),
            assets: self.assets().collect(),
            firm_sizes: self.firm_sizes.clone(),
        }
    }

    pub fn from_file(file: NetworkFile) -> Result<Self> {
        let pairs = |e: Vec<[u32; 2]>| e.into_iter().map(|[a, b]| (a, b)).collect();
        let net = MultilayerNetwork::from_edges(
            file.config,
            file.assets,
            pairs(file.bank_edges),
            pairs(file.firm_edges),
            pairs(file.interlayer_edges),
        )?;
        if net.firm_sizes != file.firm_sizes {
            return Err(Error::Network(
                "firm_sizes do not match the loan sizes of the interlayer".into(),
            ));
        }
        Ok(net)
    }

    /// Compact JSON with sorted edge lists, terminated by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&self.to_file()).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        MultilayerNetwork::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MultilayerNetwork::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Generates the full network from `cfg`, one sub-seed per stage.
pub fn assemble_network(cfg: &NetworkConfig) -> Result<MultilayerNetwork> {
    cfg.validate()?;
    let assets = generate_bank_assets(cfg, &mut rng_from_seed(cfg.stage_seed(Stage::Assets)))?;
    let profiles = build_bank_profiles(&assets, cfg);
    let bank_edges = generate_bank_layer(
        &profiles,
        cfg,
        &mut rng_from_seed(cfg.stage_seed(Stage::BankLayer)),
    )?;
    let interlayer = generate_interlayer(
        &assets,
        cfg,
        &mut rng_from_seed(cfg.stage_seed(Stage::Interlayer)),
    )?;
    let firm_edges = generate_company_layer(
        &interlayer.firm_sizes,
        cfg,
        &mut rng_from_seed(cfg.stage_seed(Stage::CompanyLayer)),
    )?;
    MultilayerNetwork::from_edges(
        cfg.clone(),
        assets,
        bank_edges,
        firm_edges,
        interlayer.edges,
    )
}
