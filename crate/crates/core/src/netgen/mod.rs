//! Synthetic multilayer bank-company networks.
//!
//! A network has three edge sets: interbank links (bank layer), inter-firm
//! links (company layer) and bank-firm loan links (interlayer). Banks and
//! firms live in separate id spaces, `0..n_banks` and `0..n_firms`.

mod assets;
mod bank_layer;
mod company_layer;
mod interlayer;
mod network;

pub use assets::{build_bank_profiles, generate_bank_assets, truncated_pareto_mean};
pub use bank_layer::{calibrate_bank_layer, expected_bank_mean_degree, generate_bank_layer};
pub use company_layer::generate_company_layer;
pub use interlayer::{generate_interlayer, loan_size, Interlayer};
pub use network::{assemble_network, Adjacency, Layer, MultilayerNetwork, NetworkFile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Parameters of the network generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_banks: usize,
    pub n_firms: usize,
    /// Tail exponent of the bank asset distribution.
    pub pareto_shape: f64,
    /// Smallest bank balance sheet.
    pub pareto_min: f64,
    /// Largest over smallest balance sheet.
    pub pareto_truncation_ratio: f64,
    /// Average fraction of external assets in a bank balance sheet.
    pub theta_bar: f64,
    /// Number of distinct banks each firm borrows from.
    pub lambda_f: usize,
    /// Target mean degree of the interbank layer.
    pub bank_mean_degree: f64,
    /// Edges added per new firm in the preferential-attachment company layer.
    pub ba_m: usize,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_banks: 250,
            n_firms: 10_000,
            pareto_shape: 2.0,
            pareto_min: 1.0,
            pareto_truncation_ratio: 100.0,
            theta_bar: 0.8,
            lambda_f: 2,
            bank_mean_degree: 10.0,
            ba_m: 3,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    /// Reduced instance with 25 banks and 1000 firms.
    pub fn desk() -> Self {
        NetworkConfig {
            n_banks: 25,
            n_firms: 1000,
            ..NetworkConfig::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_banks < 2 {
            return Err(Error::config("n_banks", "must be at least 2"));
        }
        if self.n_firms < self.n_banks {
            return Err(Error::config("n_firms", "must be >= n_banks"));
        }
        if u32::try_from(self.n_firms).is_err() {
            return Err(Error::config("n_firms", "must fit in 32 bits"));
        }
        if !(self.pareto_shape > 0.0 && self.pareto_shape.is_finite()) {
            return Err(Error::config(
                "pareto_shape",
                "must be a positive finite real",
            ));
        }
        if !(self.pareto_min > 0.0 && self.pareto_min.is_finite()) {
            return Err(Error::config(
                "pareto_min",
                "must be a positive finite real",
            ));
        }
        if !(self.pareto_truncation_ratio > 1.0 && self.pareto_truncation_ratio.is_finite()) {
            return Err(Error::config(
                "pareto_truncation_ratio",
                "must be a finite real > 1",
            ));
        }
        if !(self.theta_bar > 0.0 && self.theta_bar <= 1.0) {
            return Err(Error::config("theta_bar", "must be in (0,1]"));
        }
        if self.lambda_f == 0 || self.lambda_f > self.n_banks {
            return Err(Error::config("lambda_f", "must be in [1, n_banks]"));
        }
        let max_degree = (self.n_banks - 1) as f64;
        if !(self.bank_mean_degree > 0.0 && self.bank_mean_degree <= max_degree) {
            return Err(Error::config(
                "bank_mean_degree",
                format!("must be in (0, n_banks - 1] = (0, {max_degree}]"),
            ));
        }
        if self.ba_m == 0 || self.ba_m >= self.n_firms {
            return Err(Error::config("ba_m", "must be in [1, n_firms)"));
        }
        Ok(())
    }

    /// Seed of one generation stage.
    pub fn stage_seed(&self, stage: Stage) -> u64 {
        seed::mix(self.seed, &[stage as u64])
    }
}

/// Generation stages, each with an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Assets = 0,
    BankLayer = 1,
    Interlayer = 2,
    CompanyLayer = 3,
}

/// Balance sheet of one bank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BankProfile {
    pub assets: f64,
    pub external_assets: f64,
    pub interbank_assets: f64,
    pub interbank_liabilities: f64,
    pub net_worth: f64,
}

/// Undirected edge stored as `(min, max)`; for the interlayer `(bank, firm)`.
pub type Edge = (u32, u32);
