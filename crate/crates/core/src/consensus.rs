// SPDX-License-Identifier: Apache-2.0

//! Fork choice and the commit predicate.
//!
//! Both rules walk down from genesis and at every fork step into one child:
//! the root of the deepest subtree (longest chain) or the root of the subtree
//! holding the most blocks (heaviest subtree). Equal scores go to the
//! smallest [`BlockId`], so every node with the same view picks the same
//! branch.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{BlockDag, BlockId, TxId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForkRule {
    /// Longest chain: deepest subtree at every fork.
    Nakamoto,
    /// Heaviest subtree: most blocks at every fork, uncles included.
    Ghost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusConfig {
    pub rule: ForkRule,
    /// Blocks that must follow a block on the main branch before its
    /// transactions count as committed.
    pub m: u32,
}

impl ConsensusConfig {
    pub const BITCOIN_M: u32 = 5;
    pub const ETHEREUM_M: u32 = 11;

    pub fn new(rule: ForkRule, m: u32) -> Result<Self, ConsensusError> {
        if m == 0 {
            return Err(ConsensusError::ZeroCommitDepth);
        }
        Ok(ConsensusConfig { rule, m })
    }

    pub fn nakamoto() -> Self {
        ConsensusConfig { rule: ForkRule::Nakamoto, m: Self::BITCOIN_M }
    }

    pub fn ghost() -> Self {
        ConsensusConfig { rule: ForkRule::Ghost, m: Self::ETHEREUM_M }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConsensusError {
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("commit depth must be at least 1")]
    ZeroCommitDepth,
}

/// Genesis-to-tip sequence selected by a fork-choice rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainBranch {
    pub blocks: Vec<BlockId>,
}

impl MainBranch {
    pub fn tip(&self) -> BlockId {
        *self.blocks.last().expect("main branch holds at least genesis")
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn contains(&self, id: BlockId) -> bool {
        self.blocks.contains(&id)
    }

    pub fn position(&self, id: BlockId) -> Option<usize> {
        self.blocks.iter().position(|&b| b == id)
    }
}

/// Depth of the tree rooted at `b`: 1 for a leaf.
pub fn depth(dag: &BlockDag, b: BlockId) -> Result<u32, ConsensusError> {
    dag.subtree_depth(b).ok_or(ConsensusError::UnknownBlock(b))
}

/// Number of blocks in the tree rooted at `b`: 1 for a leaf.
pub fn num_desc(dag: &BlockDag, b: BlockId) -> Result<u64, ConsensusError> {
    dag.subtree_size(b).ok_or(ConsensusError::UnknownBlock(b))
}

/// Score of `b` under `rule`; only meaningful for comparing siblings.
pub fn score(dag: &BlockDag, rule: ForkRule, b: BlockId) -> Result<u64, ConsensusError> {
    match rule {
        ForkRule::Nakamoto => depth(dag, b).map(u64::from),
        ForkRule::Ghost => num_desc(dag, b),
    }
}

pub fn main_branch(dag: &BlockDag, cfg: &ConsensusConfig) -> MainBranch {
    let stats = dag.stats();
    let score = |id: BlockId| match cfg.rule {
        ForkRule::Nakamoto => u64::from(stats.depth(id)),
        ForkRule::Ghost => stats.size(id),
    };
    let mut blocks = Vec::new();
    let mut current = dag.genesis();
    loop {
        blocks.push(current);
        // Children are sorted by id; keep the first of equal maxima.
        let mut best: Option<(u64, BlockId)> = None;
        for &child in dag.children(current) {
            let s = score(child);
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, child));
            }
        }
        match best {
            Some((_, child)) => current = child,
            None => break,
        }
    }
    MainBranch { blocks }
}

/// Index in `branch` of the first block carrying `tx`.
pub fn tx_position(dag: &BlockDag, branch: &MainBranch, tx: TxId) -> Option<usize> {
    branch.blocks.iter().position(|&id| dag.get(id).is_some_and(|b| b.txs.contains(&tx)))
}

/// True iff `tx` sits in a main-branch block followed by at least `m`
/// further main-branch blocks.
pub fn is_committed(dag: &BlockDag, cfg: &ConsensusConfig, tx: TxId) -> bool {
    let branch = main_branch(dag, cfg);
    match tx_position(dag, &branch, tx) {
        Some(pos) => branch.len() - 1 - pos >= cfg.m as usize,
        None => false,
    }
}
