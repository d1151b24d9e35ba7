// SPDX-License-Identifier: Apache-2.0

//! Line-oriented DAG snapshot: one attached block per line, in id order,
//! `id parent miner height created_at tx_ids...`, with `-` for the missing
//! parent and miner of genesis.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use super::{Block, BlockDag, BlockId, ChainError, NodeId, TxId};
use crate::SimTime;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: &'static str },
    #[error("snapshot has no genesis line")]
    MissingGenesis,
    #[error("snapshot has more than one genesis line")]
    MultipleGenesis,
    #[error("block {0} does not connect to genesis")]
    Disconnected(BlockId),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

impl BlockDag {
    /// Canonical text form of the attached blocks. Equal views give equal text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for block in self.blocks() {
            let _ = write!(out, "{}", block.id);
            match block.parent {
                Some(p) => {
                    let _ = write!(out, " {p}");
                }
                None => out.push_str(" -"),
            }
            match block.miner {
                Some(m) => {
                    let _ = write!(out, " {m}");
                }
                None => out.push_str(" -"),
            }
            let _ = write!(out, " {} {}", block.height, block.created_at);
            for tx in &block.txs {
                let _ = write!(out, " {tx}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<BlockDag, SnapshotError> {
        let mut genesis = None;
        let mut rest = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let block = parse_line(line, line_no)?;
            if block.parent.is_none() {
                if genesis.replace(block.id).is_some() {
                    return Err(SnapshotError::MultipleGenesis);
                }
                if block != Block::genesis(block.id) {
                    return Err(SnapshotError::Malformed { line: line_no, reason: "genesis must be `id - - 0 0.0`" });
                }
            } else {
                rest.push(block);
            }
        }
        let mut dag = BlockDag::new(genesis.ok_or(SnapshotError::MissingGenesis)?);
        rest.sort_by_key(|b| (b.height, b.id));
        for block in rest {
            dag.insert(block)?;
        }
        if let Some(orphan) = dag.orphans().next() {
            return Err(SnapshotError::Disconnected(orphan.id));
        }
        Ok(dag)
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Block, SnapshotError> {
    let bad = |reason| SnapshotError::Malformed { line: line_no, reason };
    let mut fields = line.split_ascii_whitespace();
    let id = fields.next().and_then(|s| s.parse().ok()).map(BlockId).ok_or(bad("bad id"))?;
    let parent = match fields.next().ok_or(bad("missing parent"))? {
        "-" => None,
        s => Some(BlockId(s.parse().map_err(|_| bad("bad parent"))?)),
    };
    let miner = match fields.next().ok_or(bad("missing miner"))? {
        "-" => None,
        s => Some(NodeId(s.parse().map_err(|_| bad("bad miner"))?)),
    };
    let height = fields.next().and_then(|s| s.parse().ok()).ok_or(bad("bad height"))?;
    let created_at = fields.next().and_then(SimTime::parse).ok_or(bad("bad created_at"))?;
    let txs = fields.map(|s| s.parse().map(TxId).map_err(|_| bad("bad tx id"))).collect::<Result<Vec<_>, _>>()?;
    if parent.is_some() != miner.is_some() {
        return Err(bad("parent and miner must both be present or both be `-`"));
    }
    Ok(Block { id, parent, miner, height, created_at, txs })
}
