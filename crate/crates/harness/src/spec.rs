use std::path::{Path, PathBuf};

use radionet::netmodel::{build_topology, Network, NodeId, Topology};
use radionet::protocols::CompeteConfig;
use radionet::radio::Fidelity;
use serde::{Deserialize, Serialize};

use crate::config::{check_schema, ConfigFile, Profile, SCHEMA_VERSION};
use crate::error::{config_err, Result};

/// Everything needed to reproduce a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema: u32,
    pub network: NetworkSpec,
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub config: ConfigChoice,
    pub seeds: Seeds,
    /// Overrides the config's fidelity mode.
    #[serde(default)]
    pub mode: Option<Fidelity>,
    /// Overrides the config's round cap.
    #[serde(default)]
    pub round_cap: Option<u64>,
    #[serde(default)]
    pub output: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSpec {
    /// Generated from a topology family. With `per_seed` the generator is
    /// reseeded with each run seed, otherwise `seed` is used for every run.
    Generate {
        topology: Topology,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        per_seed: bool,
    },
    /// Canonical network JSON on disk.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolSpec {
    Broadcast {
        source: NodeId,
        #[serde(default = "default_value")]
        value: u64,
    },
    /// `sources` distinct nodes with random 32-bit values, drawn per seed.
    Compete { sources: usize },
    Election {
        #[serde(default = "default_c_cand")]
        c_cand: f64,
        #[serde(default = "default_id_bits")]
        id_bits: u32,
    },
    /// Decay broadcast without clustering.
    Baseline {
        source: NodeId,
        #[serde(default = "default_value")]
        value: u64,
    },
}

fn default_value() -> u64 {
    1
}

pub fn default_c_cand() -> f64 {
    2.0
}

pub fn default_id_bits() -> u32 {
    32
}

impl ProtocolSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolSpec::Broadcast { .. } => "broadcast",
            ProtocolSpec::Compete { .. } => "compete",
            ProtocolSpec::Election { .. } => "election",
            ProtocolSpec::Baseline { .. } => "baseline",
        }
    }
}

/// A built-in profile name, a config file path, or an inline config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConfigChoice {
    Profile(Profile),
    File(PathBuf),
    Inline(CompeteConfig),
}

impl Default for ConfigChoice {
    fn default() -> Self {
        ConfigChoice::Profile(Profile::default())
    }
}

impl ConfigChoice {
    pub fn resolve(&self) -> Result<CompeteConfig> {
        let cfg = match self {
            ConfigChoice::Profile(p) => p.config(),
            ConfigChoice::File(path) => ConfigFile::load(path)?.compete,
            ConfigChoice::Inline(c) => c.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Either `n` (seeds `0..n`) or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    /// Seeds in ascending order.
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// CSV file that rows are appended to.
    #[serde(default)]
    pub rows: Option<PathBuf>,
    /// JSON lines file receiving one trace summary per row.
    #[serde(default)]
    pub summaries: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(network: NetworkSpec, protocol: ProtocolSpec, seeds: Seeds) -> Self {
        ExperimentSpec {
            schema: SCHEMA_VERSION,
            network,
            protocol,
            config: ConfigChoice::default(),
            seeds,
            mode: None,
            round_cap: None,
            output: Outputs::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: ExperimentSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Effective Compete config after mode and cap overrides.
    pub fn compete_config(&self) -> Result<CompeteConfig> {
        let mut cfg = self.config.resolve()?;
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if self.round_cap.is_some() {
            cfg.round_cap = self.round_cap;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema)?;
        self.compete_config()?;
        match self.protocol {
            ProtocolSpec::Compete { sources: 0 } => return config_err("compete needs at least one source"),
            ProtocolSpec::Election { c_cand, id_bits } => {
                if !(c_cand > 0.0 && c_cand.is_finite()) {
                    return config_err(format!("c_cand must be positive, got {c_cand}"));
                }
                if !(1..=64).contains(&id_bits) {
                    return config_err(format!("id_bits must lie in 1..=64, got {id_bits}"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The network used for `seed`.
    pub fn network_for(&self, seed: u64) -> Result<Network> {
        match &self.network {
            NetworkSpec::Generate {
                topology,
                seed: s,
                per_seed,
            } => Ok(build_topology(topology, if *per_seed { seed } else { *s })?),
            NetworkSpec::File { path } => load_network(path),
        }
    }
}

pub fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path)?;
    Ok(Network::from_json(&text)?)
}
