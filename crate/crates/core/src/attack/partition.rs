// SPDX-License-Identifier: Apache-2.0

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use super::AttackError;
use crate::chain::NodeId;
use crate::simnet::{NetworkGraph, Role};

/// Instances up to this many correct miners are solved exactly.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// Class the attacker joins and mines toward.
pub const TARGET_CLASS: usize = 0;
/// Class holding the merchant whose view is made oblivious.
pub const VICTIM_CLASS: usize = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionPlan {
    /// Disjoint node sets covering the graph, each sorted.
    pub classes: Vec<Vec<NodeId>>,
    /// Every edge whose endpoints lie in different classes.
    pub cut: Vec<(NodeId, NodeId)>,
    /// Correct mining power per class, attacker excluded.
    pub class_powers: Vec<f64>,
}

impl PartitionPlan {
    pub fn class_of(&self, node: NodeId) -> Option<usize> {
        self.classes.iter().position(|c| c.binary_search(&node).is_ok())
    }

    pub fn max_power(&self) -> f64 {
        self.class_powers.iter().copied().fold(0.0, f64::max)
    }
}

/// Longest-processing-time assignment: heaviest miner first, each to the
/// currently lightest class (lowest index on ties).
pub fn lpt_assign(powers: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..powers.len()).collect();
    order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]).then(a.cmp(&b)));
    let mut load = vec![0.0f64; k];
    let mut assignment = vec![0; powers.len()];
    for i in order {
        let lightest = (0..k).min_by(|&a, &b| load[a].total_cmp(&load[b]).then(a.cmp(&b))).expect("k >= 1");
        load[lightest] += powers[i];
        assignment[i] = lightest;
    }
    assignment
}

/// Assignment minimizing the heaviest class, by branch and bound.
pub fn exhaustive_assign(powers: &[f64], k: usize) -> Vec<usize> {
    struct Search<'a> {
        powers: &'a [f64],
        order: Vec<usize>,
        load: Vec<f64>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_max: f64,
    }
    impl Search<'_> {
        fn go(&mut self, depth: usize, used: usize) {
            let max = self.load.iter().copied().fold(0.0, f64::max);
            if max >= self.best_max {
                return;
            }
            if depth == self.order.len() {
                self.best_max = max;
                self.best.clone_from(&self.current);
                return;
            }
            let item = self.order[depth];
            // Empty classes are interchangeable; only try the first one.
            let reach = (used + 1).min(self.load.len());
            for class in 0..reach {
                self.load[class] += self.powers[item];
                self.current[item] = class;
                self.go(depth + 1, used.max(class + 1));
                self.load[class] -= self.powers[item];
            }
        }
    }
    let seed = lpt_assign(powers, k);
    let mut order: Vec<usize> = (0..powers.len()).collect();
    order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]).then(a.cmp(&b)));
    let mut search = Search {
        powers,
        order,
        load: vec![0.0; k],
        current: vec![0; powers.len()],
        best_max: class_max(powers, &seed, k),
        best: seed,
    };
    search.go(0, 0);
    search.best
}

pub(crate) fn class_max(powers: &[f64], assignment: &[usize], k: usize) -> f64 {
    let mut load = vec![0.0; k];
    for (i, &c) in assignment.iter().enumerate() {
        load[c] += powers[i];
    }
    load.into_iter().fold(0.0, f64::max)
}

/// Splits the correct miners into `k` classes of near-equal power, places
/// every attacker in the target class and every other node in the class
/// of its nearest miner (by hop count, lowest id on ties).
pub fn plan_partition(graph: &NetworkGraph, k: u32) -> Result<PartitionPlan, AttackError> {
    graph.validate()?;
    let k = k as usize;
    if k < 2 {
        return Err(AttackError::InvalidParams("k must be at least 2"));
    }
    let miners: Vec<(NodeId, f64)> =
        graph.nodes.iter().filter(|n| n.role == Role::Miner).map(|n| (n.id, n.mining_power)).collect();
    if miners.len() < k {
        return Err(AttackError::TooFewMiners { needed: k, found: miners.len() });
    }
    let powers: Vec<f64> = miners.iter().map(|m| m.1).collect();
    let mut assignment = lpt_assign(&powers, k);
    if miners.len() <= EXHAUSTIVE_LIMIT {
        let exact = exhaustive_assign(&powers, k);
        if class_max(&powers, &exact, k) < class_max(&powers, &assignment, k) {
            assignment = exact;
        }
    }

    let mut class: BTreeMap<NodeId, usize> = BTreeMap::new();
    for n in graph.nodes.iter().filter(|n| n.role == Role::Attacker) {
        class.insert(n.id, TARGET_CLASS);
    }
    let mut frontier = VecDeque::new();
    for (&(id, _), &c) in miners.iter().zip(&assignment) {
        class.insert(id, c);
        frontier.push_back(id);
    }
    let mut seeds: Vec<NodeId> = frontier.drain(..).collect();
    seeds.sort();
    frontier.extend(seeds);
    while let Some(n) = frontier.pop_front() {
        let c = class[&n];
        let mut next: Vec<NodeId> = graph.neighbors(n).map(|(m, _)| m).filter(|m| !class.contains_key(m)).collect();
        next.sort();
        for m in next {
            if let Entry::Vacant(slot) = class.entry(m) {
                slot.insert(c);
                frontier.push_back(m);
            }
        }
    }
    // Nodes reachable only through attackers.
    for n in &graph.nodes {
        class.entry(n.id).or_insert(TARGET_CLASS);
    }

    let mut classes = vec![Vec::new(); k];
    let mut class_powers = vec![0.0; k];
    for n in &graph.nodes {
        let c = class[&n.id];
        classes[c].push(n.id);
        if n.role == Role::Miner {
            class_powers[c] += n.mining_power;
        }
    }
    for c in &mut classes {
        c.sort();
    }
    let cut = graph.edges.iter().filter(|e| class[&e.a] != class[&e.b]).map(|e| (e.a, e.b)).collect();
    Ok(PartitionPlan { classes, cut, class_powers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simnet::{EdgeSpec, NodeSpec};

    fn miner(id: u32, power: f64) -> NodeSpec {
        NodeSpec { id: NodeId(id), mining_power: power, role: Role::Miner }
    }

    #[test]
    fn lpt_hand_run() {
        let powers = [5.0, 4.0, 3.0, 3.0, 2.0];
        let a = lpt_assign(&powers, 2);
        assert_eq!(a, vec![0, 1, 1, 0, 1]);
        assert_eq!(class_max(&powers, &a, 2), 9.0);
        // 17 cannot split evenly, so 9 is optimal.
        assert_eq!(class_max(&powers, &exhaustive_assign(&powers, 2), 2), 9.0);
    }

    #[test]
    fn exhaustive_beats_lpt_when_possible() {
        // LPT ends at 7 against 5; {3,3} and {2,2,2} reach 6.
        let powers = [3.0, 3.0, 2.0, 2.0, 2.0];
        assert_eq!(class_max(&powers, &lpt_assign(&powers, 2), 2), 7.0);
        assert_eq!(class_max(&powers, &exhaustive_assign(&powers, 2), 2), 6.0);
    }

    #[test]
    fn two_equal_miners_split() {
        let g = NetworkGraph::full_mesh(vec![miner(1, 1.0), miner(2, 1.0)], 0.01);
        let plan = plan_partition(&g, 2).unwrap();
        assert_eq!(plan.classes, vec![vec![NodeId(1)], vec![NodeId(2)]]);
        assert_eq!(plan.class_powers, vec![1.0, 1.0]);
        assert_eq!(plan.cut, vec![(NodeId(1), NodeId(2))]);
    }

    #[test]
    fn too_few_miners() {
        let g = NetworkGraph::full_mesh(vec![miner(1, 1.0)], 0.01);
        assert_eq!(plan_partition(&g, 2), Err(AttackError::TooFewMiners { needed: 2, found: 1 }));
    }

    #[test]
    fn clients_follow_nearest_miner_and_attacker_joins_target() {
        // 1 - 3 - 4 - 2, attacker 5 hanging off client 4.
        let nodes = vec![
            miner(1, 1.0),
            miner(2, 1.0),
            NodeSpec { id: NodeId(3), mining_power: 0.0, role: Role::Client },
            NodeSpec { id: NodeId(4), mining_power: 0.0, role: Role::Client },
            NodeSpec { id: NodeId(5), mining_power: 0.5, role: Role::Attacker },
        ];
        let e = |a, b| EdgeSpec { a: NodeId(a), b: NodeId(b), latency: 0.01 };
        let g = NetworkGraph { nodes, edges: vec![e(1, 3), e(3, 4), e(4, 2), e(4, 5)] };
        let plan = plan_partition(&g, 2).unwrap();
        assert_eq!(plan.class_of(NodeId(3)), Some(0));
        assert_eq!(plan.class_of(NodeId(4)), Some(1));
        assert_eq!(plan.class_of(NodeId(5)), Some(TARGET_CLASS));
        assert_eq!(plan.class_powers, vec![1.0, 1.0]);
        assert_eq!(plan.cut, vec![(NodeId(3), NodeId(4)), (NodeId(4), NodeId(5))]);
    }
}
