// SPDX-License-Identifier: Apache-2.0

use balance_core::chain::{Block, BlockDag, BlockId, NodeId, TxId};
use balance_core::consensus::{is_committed, main_branch, ConsensusConfig, ForkRule};
use balance_core::SimTime;
use proptest::prelude::*;

fn build(edges: &[(u64, u64)], txs: &[(u64, u64)]) -> BlockDag {
    let mut dag = BlockDag::new(BlockId(0));
    for &(id, parent) in edges {
        let parent = dag.get(BlockId(parent)).unwrap().clone();
        let carried: Vec<TxId> = txs.iter().filter(|t| t.1 == id).map(|t| TxId(t.0)).collect();
        let b = Block::child_of(&parent, BlockId(id), NodeId(1), SimTime::from_nanos(id)).with_txs(carried);
        dag.insert(b).unwrap();
    }
    dag
}

/// Deep but light chain under 1, shallow but bushy subtree under 2.
fn deep_versus_heavy() -> BlockDag {
    build(
        &[
            (1, 0),
            (2, 0),
            (3, 1),
            (4, 2),
            (5, 2),
            (6, 3),
            (7, 4),
            (8, 5),
            (9, 6),
            (10, 5),
            (11, 9),
            (12, 5),
            (13, 8),
            (14, 11),
        ],
        &[(70, 2), (71, 13)],
    )
}

fn ids(v: &[u64]) -> Vec<BlockId> {
    v.iter().copied().map(BlockId).collect()
}

#[test]
fn rules_disagree_on_deep_light_versus_shallow_heavy() {
    let dag = deep_versus_heavy();
    let nakamoto = main_branch(&dag, &ConsensusConfig::new(ForkRule::Nakamoto, 2).unwrap());
    let ghost = main_branch(&dag, &ConsensusConfig::new(ForkRule::Ghost, 2).unwrap());
    assert_eq!(nakamoto.blocks, ids(&[0, 1, 3, 6, 9, 11, 14]));
    assert_eq!(ghost.blocks, ids(&[0, 2, 5, 8, 13]));
    assert_ne!(nakamoto.tip(), ghost.tip());
}

#[test]
fn commitment_follows_the_rule() {
    let dag = deep_versus_heavy();
    let ghost = ConsensusConfig::new(ForkRule::Ghost, 2).unwrap();
    let nakamoto = ConsensusConfig::new(ForkRule::Nakamoto, 2).unwrap();
    // Block 2 has 5, 8, 13 after it; block 13 is the tip.
    assert!(is_committed(&dag, &ghost, TxId(70)));
    assert!(!is_committed(&dag, &ghost, TxId(71)));
    assert!(!is_committed(&dag, &nakamoto, TxId(70)));
}

fn random_tree(parents: &[u16]) -> BlockDag {
    let edges: Vec<(u64, u64)> =
        parents.iter().enumerate().map(|(i, &p)| (i as u64 + 1, u64::from(p) % (i as u64 + 1))).collect();
    build(&edges, &[])
}

proptest! {
    #[test]
    fn main_branch_is_a_root_to_leaf_path(parents in prop::collection::vec(any::<u16>(), 0..80), ghost in any::<bool>()) {
        let dag = random_tree(&parents);
        let rule = if ghost { ForkRule::Ghost } else { ForkRule::Nakamoto };
        let branch = main_branch(&dag, &ConsensusConfig::new(rule, 1).unwrap());
        prop_assert_eq!(branch.blocks[0], BlockId(0));
        for w in branch.blocks.windows(2) {
            prop_assert_eq!(dag.get(w[1]).unwrap().parent, Some(w[0]));
        }
        prop_assert!(dag.children(branch.tip()).is_empty());
    }

    #[test]
    fn nakamoto_reaches_maximal_height(parents in prop::collection::vec(any::<u16>(), 0..80)) {
        let dag = random_tree(&parents);
        let branch = main_branch(&dag, &ConsensusConfig::new(ForkRule::Nakamoto, 1).unwrap());
        let tallest = dag.blocks().map(|b| b.height).max().unwrap();
        prop_assert_eq!(dag.height(branch.tip()), Some(tallest));
    }

    #[test]
    fn ghost_steps_into_a_heaviest_child(parents in prop::collection::vec(any::<u16>(), 0..80)) {
        let dag = random_tree(&parents);
        let branch = main_branch(&dag, &ConsensusConfig::new(ForkRule::Ghost, 1).unwrap());
        for w in branch.blocks.windows(2) {
            let chosen = dag.subtree_size(w[1]).unwrap();
            for &sibling in dag.children(w[0]) {
                let s = dag.subtree_size(sibling).unwrap();
                prop_assert!(s < chosen || (s == chosen && sibling >= w[1]));
            }
        }
    }
}
