// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event network simulation.
//!
//! Every node keeps its own [`BlockDag`](crate::chain::BlockDag). Miners draw
//! block discoveries once per tick from a binomial distribution (trials =
//! power x tick, success probability 1/difficulty), extend the tip their fork
//! choice dictates and broadcast. Links deliver after their latency; a
//! [`DelayInjection`] holds everything crossing its cut until the delay lifts.

mod engine;
mod graph;
pub(crate) mod outcome;

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, NodeId, TxId};
use crate::consensus::ConsensusConfig;
use crate::SimTime;

pub use engine::{MiningStrategy, Simulation, StrategyContext, GENESIS};
pub use graph::{EdgeSpec, NetworkGraph, NodeSpec, Role};
pub use outcome::{count_uncles, SimulationOutcome, UncleCounts};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningModel {
    /// Expected hash trials per block, in hashes.
    pub difficulty: f64,
    /// Length of one sampling step, in seconds.
    pub tick: f64,
}

impl MiningModel {
    pub fn new(difficulty: f64, tick: f64) -> Result<Self, SimError> {
        let model = MiningModel { difficulty, tick };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.difficulty >= 1.0) || !self.difficulty.is_finite() {
            return Err(SimError::InvalidConfig("difficulty must be a finite number >= 1"));
        }
        if !(self.tick > 0.0) || !self.tick.is_finite() {
            return Err(SimError::InvalidConfig("tick must be positive"));
        }
        if SimTime::from_secs_f64(self.tick) == SimTime::ZERO {
            return Err(SimError::InvalidConfig("tick is shorter than a nanosecond"));
        }
        Ok(())
    }

    /// Per-hash success probability.
    pub fn p(&self) -> f64 {
        1.0 / self.difficulty
    }

    pub fn trials_per_tick(&self, power: f64) -> u64 {
        libm::round(power * self.tick) as u64
    }

    /// Expected blocks per tick for a node of the given power.
    pub fn expected_per_tick(&self, power: f64) -> f64 {
        power * self.tick / self.difficulty
    }

    pub(crate) fn per_tick_distribution(&self, power: f64) -> Option<Binomial> {
        let trials = self.trials_per_tick(power);
        if trials == 0 {
            return None;
        }
        Some(Binomial::new(trials, self.p()).expect("p in (0, 1]"))
    }
}

/// Holds every message crossing `cut` during `[start, start + duration)`
/// and releases it at `start + duration` plus the link latency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayInjection {
    /// Unordered node pairs; each must be an edge of the graph.
    pub cut: Vec<(NodeId, NodeId)>,
    pub start: f64,
    pub duration: f64,
}

impl DelayInjection {
    pub fn window(&self) -> (SimTime, SimTime) {
        let start = SimTime::from_secs_f64(self.start);
        (start, start + SimTime::from_secs_f64(self.duration))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelayMode {
    /// Every node forwards each new block and transaction to its neighbors.
    #[default]
    Gossip,
    /// Only the miner (or issuer) sends, to its direct neighbors.
    OriginOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("no edge between {0} and {1}")]
    UnknownEdge(NodeId, NodeId),
    #[error("node {0} listed twice")]
    DuplicateNode(NodeId),
    #[error("transaction {0} issued twice")]
    DuplicateTx(TxId),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Sum of per-tick binomial draws over `duration` seconds (rounded to whole ticks).
pub fn sample_blocks<R: Rng + ?Sized>(power: f64, duration: f64, mining: &MiningModel, rng: &mut R) -> u64 {
    let ticks = libm::round(duration / mining.tick) as u64;
    match mining.per_tick_distribution(power) {
        Some(dist) => (0..ticks).map(|_| dist.sample(rng)).sum(),
        None => 0,
    }
}

/// Runs a plain scenario to `horizon` seconds and summarizes it.
///
/// Partition classes are the connected components left after removing every
/// injected cut; block counts cover the span of the injections, or the whole
/// run when there are none.
pub fn run(
    graph: &NetworkGraph,
    mining: &MiningModel,
    cfg: &ConsensusConfig,
    injections: &[DelayInjection],
    relay: RelayMode,
    horizon: f64,
    seed: u64,
) -> Result<SimulationOutcome, SimError> {
    if !(horizon > 0.0) {
        return Err(SimError::InvalidConfig("horizon must be positive"));
    }
    let horizon = SimTime::from_secs_f64(horizon);
    let mut sim = Simulation::new(graph.clone(), *mining, *cfg, injections, relay, seed)?;
    let cut: Vec<(NodeId, NodeId)> = injections.iter().flat_map(|inj| inj.cut.iter().copied()).collect();
    let classes = graph.components_without(&cut);
    let window = match injections.iter().map(DelayInjection::window).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))) {
        Some(w) => w,
        None => (SimTime::ZERO, horizon),
    };
    let snapshot_at = window.1.min(horizon);
    sim.run_until(snapshot_at);
    let snapshots =
        classes.iter().map(|class| sim.view(class[0]).expect("class member exists").clone()).collect::<Vec<_>>();
    sim.run_until(horizon);
    Ok(SimulationOutcome::collect(&sim, classes, window, &snapshots))
}
