// SPDX-License-Identifier: Apache-2.0

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::{Ref, RefCell};

use super::{Block, BlockId, ChainError};

/// A local blockchain view: a tree of blocks rooted at genesis.
///
/// Blocks whose parent is not known yet are parked in an orphan buffer and
/// attached automatically once the parent arrives, so the view converges to
/// the union of everything received regardless of delivery order.
#[derive(Clone, Debug)]
pub struct BlockDag {
    genesis: BlockId,
    blocks: BTreeMap<BlockId, Block>,
    /// Children of every attached block, sorted by id.
    children: BTreeMap<BlockId, Vec<BlockId>>,
    orphans: BTreeMap<BlockId, Block>,
    /// Orphan ids keyed by the missing parent they wait for.
    waiting: BTreeMap<BlockId, BTreeSet<BlockId>>,
    stats: RefCell<Option<SubtreeStats>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    /// The block was already known with identical content.
    Duplicate,
    /// The parent is missing; the block waits in the orphan buffer.
    Orphaned,
    /// The block is attached, along with `count - 1` orphans it released.
    Attached { count: usize },
}

impl InsertOutcome {
    pub fn is_new(self) -> bool {
        !matches!(self, InsertOutcome::Duplicate)
    }
}

/// Memoized per-block subtree depth and size over the attached blocks.
#[derive(Clone, Debug)]
pub(crate) struct SubtreeStats {
    depth: BTreeMap<BlockId, u32>,
    size: BTreeMap<BlockId, u64>,
}

impl BlockDag {
    pub fn new(genesis: BlockId) -> Self {
        let mut blocks = BTreeMap::new();
        blocks.insert(genesis, Block::genesis(genesis));
        let mut children = BTreeMap::new();
        children.insert(genesis, Vec::new());
        BlockDag {
            genesis,
            blocks,
            children,
            orphans: BTreeMap::new(),
            waiting: BTreeMap::new(),
            stats: RefCell::new(None),
        }
    }

    pub fn genesis(&self) -> BlockId {
        self.genesis
    }

    pub fn get(&self, id: BlockId) -> Option<&Block> {
        self.blocks.get(&id)
    }

    /// True if `id` is attached to the tree.
    pub fn contains(&self, id: BlockId) -> bool {
        self.blocks.contains_key(&id)
    }

    /// True if `id` is attached or waiting in the orphan buffer.
    pub fn knows(&self, id: BlockId) -> bool {
        self.blocks.contains_key(&id) || self.orphans.contains_key(&id)
    }

    pub fn children(&self, id: BlockId) -> &[BlockId] {
        self.children.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn height(&self, id: BlockId) -> Option<u64> {
        self.blocks.get(&id).map(|b| b.height)
    }

    /// Number of attached blocks, genesis included.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn orphan_count(&self) -> usize {
        self.orphans.len()
    }

    /// Attached blocks in id order.
    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.values()
    }

    pub fn orphans(&self) -> impl Iterator<Item = &Block> {
        self.orphans.values()
    }

    pub fn insert(&mut self, block: Block) -> Result<InsertOutcome, ChainError> {
        if let Some(existing) = self.blocks.get(&block.id).or_else(|| self.orphans.get(&block.id)) {
            return if *existing == block {
                Ok(InsertOutcome::Duplicate)
            } else {
                Err(ChainError::DuplicateConflict(block.id))
            };
        }
        let parent_id = block.parent.ok_or(ChainError::SecondGenesis(block.id))?;
        let Some(parent) = self.blocks.get(&parent_id) else {
            self.waiting.entry(parent_id).or_default().insert(block.id);
            self.orphans.insert(block.id, block);
            return Ok(InsertOutcome::Orphaned);
        };
        let expected = parent.height + 1;
        if block.height != expected {
            return Err(ChainError::HeightMismatch { id: block.id, claimed: block.height, expected });
        }
        let mut count = 0;
        let mut ready = vec![block];
        while let Some(block) = ready.pop() {
            let id = block.id;
            self.attach(block);
            count += 1;
            for orphan_id in self.waiting.remove(&id).unwrap_or_default() {
                let orphan = self.orphans.remove(&orphan_id).expect("waiting orphan is buffered");
                // An orphan that lied about its height can never fit; drop it.
                if self.blocks[&id].height + 1 == orphan.height {
                    ready.push(orphan);
                }
            }
        }
        *self.stats.get_mut() = None;
        Ok(InsertOutcome::Attached { count })
    }

    fn attach(&mut self, block: Block) {
        let id = block.id;
        let parent = block.parent.expect("non-genesis");
        let siblings = self.children.get_mut(&parent).expect("parent attached");
        let pos = siblings.binary_search(&id).unwrap_or_else(|p| p);
        siblings.insert(pos, id);
        self.children.insert(id, Vec::new());
        self.blocks.insert(id, block);
    }

    /// Union of the two views. Both must grow from the same genesis.
    pub fn merge(&self, remote: &BlockDag) -> Result<BlockDag, ChainError> {
        let mut merged = self.clone();
        merged.absorb(remote)?;
        Ok(merged)
    }

    /// In-place union with `remote`.
    pub fn absorb(&mut self, remote: &BlockDag) -> Result<(), ChainError> {
        if self.genesis != remote.genesis {
            return Err(ChainError::GenesisMismatch { local: self.genesis, remote: remote.genesis });
        }
        let mut incoming: Vec<&Block> = remote.blocks.values().filter(|b| !b.is_genesis()).collect();
        incoming.sort_by_key(|b| (b.height, b.id));
        for block in incoming.into_iter().chain(remote.orphans.values()) {
            self.insert(block.clone())?;
        }
        Ok(())
    }

    pub(crate) fn stats(&self) -> Ref<'_, SubtreeStats> {
        if self.stats.borrow().is_none() {
            *self.stats.borrow_mut() = Some(SubtreeStats::compute(self));
        }
        Ref::map(self.stats.borrow(), |s| s.as_ref().expect("computed above"))
    }

    /// Length of the longest path from `id` down to a leaf, counting `id`.
    pub fn subtree_depth(&self, id: BlockId) -> Option<u32> {
        self.stats().depth.get(&id).copied()
    }

    /// Number of blocks in the subtree rooted at `id`, counting `id`.
    pub fn subtree_size(&self, id: BlockId) -> Option<u64> {
        self.stats().size.get(&id).copied()
    }
}

impl SubtreeStats {
    fn compute(dag: &BlockDag) -> Self {
        let max_height = dag.blocks.values().map(|b| b.height).max().unwrap_or(0) as usize;
        let mut levels: Vec<Vec<BlockId>> = vec![Vec::new(); max_height + 1];
        for block in dag.blocks.values() {
            levels[block.height as usize].push(block.id);
        }
        let mut depth = BTreeMap::new();
        let mut size = BTreeMap::new();
        for level in levels.iter().rev() {
            for &id in level {
                let kids = dag.children(id);
                let d = 1 + kids.iter().map(|c| depth[c]).max().unwrap_or(0);
                let s = 1 + kids.iter().map(|c| size[c]).sum::<u64>();
                depth.insert(id, d);
                size.insert(id, s);
            }
        }
        SubtreeStats { depth, size }
    }

    pub(crate) fn depth(&self, id: BlockId) -> u32 {
        self.depth[&id]
    }

    pub(crate) fn size(&self, id: BlockId) -> u64 {
        self.size[&id]
    }
}

impl PartialEq for BlockDag {
    fn eq(&self, other: &Self) -> bool {
        self.genesis == other.genesis && self.blocks == other.blocks && self.orphans == other.orphans
    }
}

impl Eq for BlockDag {}
