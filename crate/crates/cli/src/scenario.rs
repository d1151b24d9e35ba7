// SPDX-License-Identifier: Apache-2.0

//! JSON scenario files.
//!
//! A scenario describes the network, the mining model, the fork rule and
//! optional delay injections; an `attack` section turns it into an attack
//! run, and a `run` section fixes the seeds of a batch.

use std::path::PathBuf;

use balance_core::attack::AttackParams;
use balance_core::chain::NodeId;
use balance_core::consensus::{ConsensusConfig, ForkRule};
use balance_core::simnet::{DelayInjection, EdgeSpec, MiningModel, NetworkGraph, NodeSpec, RelayMode, Role};
use serde::{Deserialize, Serialize};

use crate::units::{Dimension, Quantity, UnitError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub network: NetworkSection,
    pub mining: MiningSection,
    pub consensus: ConsensusSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub injections: Vec<InjectionSection>,
    #[serde(default)]
    pub relay: RelayMode,
    /// Run length in seconds; attack runs stop once the merge settles.
    pub horizon: Quantity,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub nodes: Vec<NodeEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
    /// Connects every pair of nodes with this latency instead of listing edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_mesh_latency: Option<Quantity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: u32,
    #[serde(default = "zero")]
    pub power: Quantity,
    pub role: Role,
}

fn zero() -> Quantity {
    Quantity::Number(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub a: u32,
    pub b: u32,
    pub latency: Quantity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiningSection {
    pub difficulty: Quantity,
    #[serde(default = "one_second")]
    pub tick: Quantity,
}

fn one_second() -> Quantity {
    Quantity::Number(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusSection {
    pub rule: ForkRule,
    /// Commit depth; 5 for nakamoto and 11 for ghost when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionSection {
    pub cut: Vec<(u32, u32)>,
    #[serde(default = "zero")]
    pub start: Quantity,
    pub duration: Quantity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    pub rho: f64,
    #[serde(default = "two")]
    pub k: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Seconds, a unit string, or `"auto"` to derive it from `epsilon`.
    #[serde(default = "auto")]
    pub tau: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Defaults to the consensus rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<ForkRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    #[serde(default = "zero")]
    pub start: Quantity,
}

fn two() -> u32 {
    2
}

fn default_epsilon() -> f64 {
    0.1
}

fn auto() -> Quantity {
    Quantity::Text("auto".into())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Explicit seed list; wins over `seed_count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Number of consecutive seeds starting at the scenario seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Scenario resolved into core types.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub graph: NetworkGraph,
    pub mining: MiningModel,
    pub cfg: ConsensusConfig,
    pub injections: Vec<DelayInjection>,
    pub relay: RelayMode,
    pub horizon: f64,
    pub seed: u64,
    pub attack: Option<AttackParams>,
    pub run: RunSection,
}

impl Resolved {
    /// Seeds of a batch: the explicit list, else `count` (or the run
    /// section's count, or one) consecutive seeds from `base`.
    pub fn batch_seeds(&self, base: u64, count: Option<u64>) -> Vec<u64> {
        if count.is_none() {
            if let Some(seeds) = &self.run.seeds {
                return seeds.clone();
            }
        }
        let n = count.or(self.run.seed_count).unwrap_or(1);
        (0..n).map(|i| base.wrapping_add(i)).collect()
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ConfigError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let nodes = self
            .network
            .nodes
            .iter()
            .map(|n| {
                Ok(NodeSpec { id: NodeId(n.id), mining_power: n.power.resolve(Dimension::HashRate)?, role: n.role })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let graph = match (&self.network.full_mesh_latency, self.network.edges.is_empty()) {
            (Some(latency), true) => NetworkGraph::full_mesh(nodes, latency.resolve(Dimension::Seconds)?),
            (None, _) => {
                let edges = self
                    .network
                    .edges
                    .iter()
                    .map(|e| {
                        Ok(EdgeSpec { a: NodeId(e.a), b: NodeId(e.b), latency: e.latency.resolve(Dimension::Seconds)? })
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                NetworkGraph { nodes, edges }
            }
            (Some(_), false) => return Err(invalid("network: give either edges or full_mesh_latency, not both")),
        };
        graph.validate().map_err(|e| invalid(format!("network: {e}")))?;

        let mining = MiningModel::new(
            self.mining.difficulty.resolve(Dimension::Hashes)?,
            self.mining.tick.resolve(Dimension::Seconds)?,
        )
        .map_err(|e| invalid(format!("mining: {e}")))?;

        let m = self.consensus.m.unwrap_or(match self.consensus.rule {
            ForkRule::Nakamoto => ConsensusConfig::BITCOIN_M,
            ForkRule::Ghost => ConsensusConfig::ETHEREUM_M,
        });
        let cfg = ConsensusConfig::new(self.consensus.rule, m).map_err(|e| invalid(format!("consensus: {e}")))?;

        let injections = self
            .injections
            .iter()
            .map(|inj| {
                Ok(DelayInjection {
                    cut: inj.cut.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect(),
                    start: inj.start.resolve(Dimension::Seconds)?,
                    duration: inj.duration.resolve(Dimension::Seconds)?,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;

        let horizon = self.horizon.resolve(Dimension::Seconds)?;
        if horizon.is_nan() || horizon <= 0.0 {
            return Err(invalid("horizon must be positive"));
        }

        let attack = self.attack.as_ref().map(|a| a.resolve(cfg.rule)).transpose()?;
        if attack.is_some() && !self.injections.is_empty() {
            return Err(invalid("attack scenarios derive their own injection; drop the injections section"));
        }

        Ok(Resolved {
            graph,
            mining,
            cfg,
            injections,
            relay: self.relay,
            horizon,
            seed: self.seed,
            attack,
            run: self.run.clone().unwrap_or_default(),
        })
    }
}

impl AttackSection {
    fn resolve(&self, rule: ForkRule) -> Result<AttackParams, ConfigError> {
        let tau = match &self.tau {
            Quantity::Text(t) if t.trim() == "auto" => None,
            q => Some(q.resolve(Dimension::Seconds)?),
        };
        let params = AttackParams {
            rho: self.rho,
            k: self.k,
            epsilon: self.epsilon,
            tau,
            delta: self.delta,
            variant: self.variant.unwrap_or(rule),
            pi: self.pi,
            start: self.start.resolve(Dimension::Seconds)?,
        };
        params.validate().map_err(|e| invalid(format!("attack: {e}")))?;
        Ok(params)
    }
}
