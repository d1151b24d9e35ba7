// SPDX-License-Identifier: Apache-2.0

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use super::{Role, Simulation};
use crate::chain::{BlockDag, NodeId};
use crate::consensus::{main_branch, ConsensusConfig};
use crate::SimTime;

/// Blocks left off the main branch, grouped by who mined them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UncleCounts {
    pub per_class: Vec<u64>,
    pub attacker: u64,
}

/// Summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationOutcome {
    /// Partition classes; attacker nodes sit in the class they connect to.
    pub classes: Vec<Vec<NodeId>>,
    pub attackers: Vec<NodeId>,
    /// `(start, end]` span the block counts cover.
    pub window: (SimTime, SimTime),
    /// Blocks mined by the correct miners of each class inside the window.
    pub per_subgraph_blocks: Vec<u64>,
    /// Largest pairwise difference of `per_subgraph_blocks`.
    pub delta: u64,
    pub attacker_blocks: u64,
    /// Class whose window-era blocks made it onto the final main branch.
    pub adopted_origin: Option<usize>,
    /// Some class had a decided block at the end of the window that the final
    /// main branch no longer contains.
    pub reverted_commit: bool,
    pub uncle_counts: UncleCounts,
    pub main_branch_len: usize,
    #[serde(skip)]
    pub final_dag: BlockDag,
    #[serde(skip)]
    pub cfg: ConsensusConfig,
}

pub(crate) fn class_lookup(classes: &[Vec<NodeId>]) -> BTreeMap<NodeId, usize> {
    classes.iter().enumerate().flat_map(|(i, class)| class.iter().map(move |&n| (n, i))).collect()
}

pub(crate) fn delta_of(counts: &[u64]) -> u64 {
    match (counts.iter().max(), counts.iter().min()) {
        (Some(max), Some(min)) => max - min,
        _ => 0,
    }
}

impl SimulationOutcome {
    /// `snapshots[i]` is class `i`'s view taken at the end of the window.
    pub(crate) fn collect(
        sim: &Simulation,
        classes: Vec<Vec<NodeId>>,
        window: (SimTime, SimTime),
        snapshots: &[BlockDag],
    ) -> Self {
        let cfg = *sim.cfg();
        let lookup = class_lookup(&classes);
        let attackers: Vec<NodeId> = sim.node_ids().filter(|&n| sim.role(n) == Some(Role::Attacker)).collect();
        let in_window = |t: SimTime| window.0 < t && t <= window.1;
        let mut per_subgraph_blocks = vec![0u64; classes.len()];
        let mut attacker_blocks = 0;
        for block in sim.minted().filter(|b| in_window(b.created_at)) {
            let miner = block.miner.expect("minted blocks have miners");
            if attackers.contains(&miner) {
                attacker_blocks += 1;
            } else if let Some(&class) = lookup.get(&miner) {
                per_subgraph_blocks[class] += 1;
            }
        }
        let final_dag = sim.global_view();
        let branch = main_branch(&final_dag, &cfg);
        let adopted_origin = branch
            .blocks
            .iter()
            .filter_map(|&id| final_dag.get(id))
            .find(|b| in_window(b.created_at))
            .and_then(|b| b.miner)
            .and_then(|m| lookup.get(&m).copied());
        let on_branch: BTreeSet<_> = branch.blocks.iter().copied().collect();
        let reverted_commit = snapshots.iter().any(|snap| {
            let snap_branch = main_branch(snap, &cfg);
            match snap_branch.len().checked_sub(1 + cfg.m as usize) {
                Some(last_decided) => snap_branch.blocks[..=last_decided].iter().any(|b| !on_branch.contains(b)),
                None => false,
            }
        });
        let uncle_counts = uncles(&final_dag, &cfg, &classes, &attackers);
        SimulationOutcome {
            delta: delta_of(&per_subgraph_blocks),
            classes,
            attackers,
            window,
            per_subgraph_blocks,
            attacker_blocks,
            adopted_origin,
            reverted_commit,
            uncle_counts,
            main_branch_len: branch.len(),
            final_dag,
            cfg,
        }
    }
}

pub(crate) fn uncles(
    dag: &BlockDag,
    cfg: &ConsensusConfig,
    classes: &[Vec<NodeId>],
    attackers: &[NodeId],
) -> UncleCounts {
    let lookup = class_lookup(classes);
    let branch: BTreeSet<_> = main_branch(dag, cfg).blocks.into_iter().collect();
    let mut counts = UncleCounts { per_class: vec![0; classes.len()], attacker: 0 };
    for block in dag.blocks().filter(|b| !branch.contains(&b.id)) {
        let Some(miner) = block.miner else { continue };
        if attackers.contains(&miner) {
            counts.attacker += 1;
        } else if let Some(&class) = lookup.get(&miner) {
            counts.per_class[class] += 1;
        }
    }
    counts
}

/// Attached blocks missing from the final main branch, by miner class.
pub fn count_uncles(outcome: &SimulationOutcome, cfg: &ConsensusConfig) -> UncleCounts {
    uncles(&outcome.final_dag, cfg, &outcome.classes, &outcome.attackers)
}
