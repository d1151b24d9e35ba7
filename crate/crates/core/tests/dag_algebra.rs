// SPDX-License-Identifier: Apache-2.0

use balance_core::chain::{Block, BlockDag, BlockId, NodeId, TxId};
use balance_core::SimTime;
use proptest::prelude::*;

/// Random tree over ids `1..=n`; block `i` hangs off an earlier block.
fn universe(parents: &[u16]) -> Vec<Block> {
    let mut blocks = vec![Block::genesis(BlockId(0))];
    for (i, &p) in parents.iter().enumerate() {
        let parent = blocks[p as usize % blocks.len()].clone();
        let id = i as u64 + 1;
        let b = Block::child_of(&parent, BlockId(id), NodeId(id as u32 % 5), SimTime::from_nanos(id * 7))
            .with_txs(vec![TxId(id % 3)]);
        blocks.push(b);
    }
    blocks
}

fn view(universe: &[Block], mask: &[bool], rotate: usize) -> BlockDag {
    let mut picked: Vec<&Block> =
        universe[1..].iter().zip(mask.iter().cycle()).filter(|(_, &m)| m).map(|(b, _)| b).collect();
    if !picked.is_empty() {
        let r = rotate % picked.len();
        picked.rotate_left(r);
    }
    let mut dag = BlockDag::new(BlockId(0));
    for b in picked {
        dag.insert(b.clone()).unwrap();
    }
    dag
}

fn canonical(dag: &BlockDag) -> (String, Vec<BlockId>) {
    (dag.to_text(), dag.orphans().map(|b| b.id).collect())
}

fn triple() -> impl Strategy<Value = (Vec<u16>, [Vec<bool>; 3], [usize; 3])> {
    (
        prop::collection::vec(any::<u16>(), 0..40),
        [
            prop::collection::vec(any::<bool>(), 1..40),
            prop::collection::vec(any::<bool>(), 1..40),
            prop::collection::vec(any::<bool>(), 1..40),
        ],
        [any::<usize>(), any::<usize>(), any::<usize>()],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn merge_is_idempotent_commutative_associative((parents, masks, rot) in triple()) {
        let u = universe(&parents);
        let a = view(&u, &masks[0], rot[0]);
        let b = view(&u, &masks[1], rot[1]);
        let c = view(&u, &masks[2], rot[2]);
        prop_assert_eq!(canonical(&a.merge(&a).unwrap()), canonical(&a));
        prop_assert_eq!(canonical(&a.merge(&b).unwrap()), canonical(&b.merge(&a).unwrap()));
        let left = a.merge(&b).unwrap().merge(&c).unwrap();
        let right = a.merge(&b.merge(&c).unwrap()).unwrap();
        prop_assert_eq!(canonical(&left), canonical(&right));
        prop_assert!(left == right);
    }

    #[test]
    fn insertion_order_does_not_matter((parents, masks, rot) in triple()) {
        let u = universe(&parents);
        prop_assert_eq!(canonical(&view(&u, &masks[0], rot[0])), canonical(&view(&u, &masks[0], 0)));
    }

    #[test]
    fn snapshot_round_trips(parents in prop::collection::vec(any::<u16>(), 0..60)) {
        let u = universe(&parents);
        let full = view(&u, &[true], 0);
        prop_assert_eq!(full.orphan_count(), 0);
        let text = full.to_text();
        let back = BlockDag::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert!(back == full);
    }

    #[test]
    fn union_of_parts_is_the_whole(parents in prop::collection::vec(any::<u16>(), 0..40), mask in prop::collection::vec(any::<bool>(), 1..40)) {
        let u = universe(&parents);
        let inverse: Vec<bool> = mask.iter().map(|m| !m).collect();
        let merged = view(&u, &mask, 0).merge(&view(&u, &inverse, 0)).unwrap();
        prop_assert_eq!(merged.orphan_count(), 0);
        prop_assert_eq!(merged.block_count(), u.len());
    }
}
