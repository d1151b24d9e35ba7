// SPDX-License-Identifier: Apache-2.0

//! Blocks, transactions and the block DAG.

mod dag;
mod snapshot;

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::SimTime;

pub use dag::{BlockDag, InsertOutcome};
pub use snapshot::SnapshotError;

/// Simulator-assigned block identifier. Ordering doubles as the fork-choice tie-break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TxId(pub u64);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    /// `None` only for the genesis block.
    pub parent: Option<BlockId>,
    /// `None` only for the genesis block.
    pub miner: Option<NodeId>,
    /// Hops from genesis.
    pub height: u64,
    pub created_at: SimTime,
    pub txs: Vec<TxId>,
}

impl Block {
    pub fn genesis(id: BlockId) -> Self {
        Block { id, parent: None, miner: None, height: 0, created_at: SimTime::ZERO, txs: Vec::new() }
    }

    pub fn child_of(parent: &Block, id: BlockId, miner: NodeId, created_at: SimTime) -> Self {
        Block {
            id,
            parent: Some(parent.id),
            miner: Some(miner),
            height: parent.height + 1,
            created_at,
            txs: Vec::new(),
        }
    }

    pub fn with_txs(mut self, txs: Vec<TxId>) -> Self {
        self.txs = txs;
        self
    }

    pub fn is_genesis(&self) -> bool {
        self.parent.is_none()
    }
}

/// A coin transfer. `conflicts_with` links the two halves of a double spend.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: TxId,
    pub source: NodeId,
    pub destination: NodeId,
    pub amount: u64,
    pub conflicts_with: Option<TxId>,
}

impl Transaction {
    pub fn new(id: TxId, source: NodeId, destination: NodeId, amount: u64) -> Result<Self, ChainError> {
        if source == destination {
            return Err(ChainError::SelfTransfer(id));
        }
        Ok(Transaction { id, source, destination, amount, conflicts_with: None })
    }

    pub fn conflicting_with(mut self, other: TxId) -> Self {
        self.conflicts_with = Some(other);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("block {0} already present with different content")]
    DuplicateConflict(BlockId),
    #[error("genesis mismatch: {local} vs {remote}")]
    GenesisMismatch { local: BlockId, remote: BlockId },
    #[error("block {0} has no parent but is not the genesis block")]
    SecondGenesis(BlockId),
    #[error("block {id} claims height {claimed}, expected {expected}")]
    HeightMismatch { id: BlockId, claimed: u64, expected: u64 },
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("transaction {0} sends to its own source")]
    SelfTransfer(TxId),
}
