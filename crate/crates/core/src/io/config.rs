use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::engine::SpreadParams;
use crate::error::{Error, Result};
use crate::netgen::NetworkConfig;
use crate::sweep::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

/// A run or sweep configuration document.
///
/// Every section is optional and filled with defaults; `params` and `grid`
/// are mutually exclusive.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkConfig,
    /// Load a serialized network instead of generating one from `network`.
    pub network_file: Option<PathBuf>,
    pub params: Option<SpreadParams>,
    pub grid: Option<GridSpec>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

fn scoped(section: &str, err: Error) -> Error {
    match err {
        Error::Config { key, constraint } => Error::Config {
            key: format!("{section}.{key}"),
            constraint,
        },
        other => other,
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate().map_err(|e| scoped("network", e))?;
        if let Some(p) = &self.params {
            p.validate().map_err(|e| scoped("params", e))?;
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| scoped("grid", e))?;
        }
        if self.params.is_some() && self.grid.is_some() {
            return Err(Error::config("params", "cannot be combined with `grid`"));
        }
        Ok(())
    }

    /// Replaces every seed (network, run and grid) with `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.network.seed = seed;
        if let Some(p) = self.params.as_mut() {
            p.seed = seed;
        }
        if let Some(g) = self.grid.as_mut() {
            g.base_seed = seed;
        }
    }

    /// Pretty-printed effective configuration.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
