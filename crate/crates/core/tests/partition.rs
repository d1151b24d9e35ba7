// SPDX-License-Identifier: Apache-2.0

use balance_core::attack::{lpt_assign, plan_partition};
use balance_core::chain::NodeId;
use balance_core::simnet::{NetworkGraph, NodeSpec, Role};
use proptest::prelude::*;

/// Optimal heaviest class by plain enumeration of all k^n assignments.
fn brute_force_max(powers: &[f64], k: usize) -> f64 {
    let n = powers.len();
    let mut best = f64::INFINITY;
    for code in 0..k.pow(n as u32) {
        let mut load = vec![0.0; k];
        let mut c = code;
        for p in powers {
            load[c % k] += p;
            c /= k;
        }
        best = best.min(load.iter().copied().fold(0.0, f64::max));
    }
    best
}

fn graph(powers: &[f64], attacker: f64) -> NetworkGraph {
    let mut nodes: Vec<NodeSpec> = powers
        .iter()
        .enumerate()
        .map(|(i, &p)| NodeSpec { id: NodeId(i as u32 + 1), mining_power: p, role: Role::Miner })
        .collect();
    nodes.push(NodeSpec { id: NodeId(100), mining_power: attacker, role: Role::Attacker });
    nodes.push(NodeSpec { id: NodeId(101), mining_power: 0.0, role: Role::Client });
    NetworkGraph::full_mesh(nodes, 0.02)
}

#[test]
fn testbed_split_is_even() {
    let mut powers = Vec::new();
    for p in [2.0e6, 1.8e6, 1.5e6, 1.2e6, 0.9e6, 0.8e6, 0.6e6] {
        powers.extend([p, p]);
    }
    let plan = plan_partition(&graph(&powers, 2.4e6), 2).unwrap();
    assert!((plan.class_powers[0] - 8.8e6).abs() < 1.0);
    assert!((plan.class_powers[1] - 8.8e6).abs() < 1.0);
    assert_eq!(plan.class_of(NodeId(100)), Some(0));
}

proptest! {
    #[test]
    fn plan_is_optimal_on_small_instances(
        powers in prop::collection::vec(1u32..100, 2..=8),
        k in 2usize..=4,
    ) {
        prop_assume!(powers.len() >= k);
        let powers: Vec<f64> = powers.into_iter().map(f64::from).collect();
        let plan = plan_partition(&graph(&powers, 10.0), k as u32).unwrap();
        let opt = brute_force_max(&powers, k);
        prop_assert!((plan.max_power() - opt).abs() < 1e-9);
        // Graham's bound for the greedy schedule.
        let lpt = lpt_assign(&powers, k);
        let mut load = vec![0.0; k];
        for (i, &c) in lpt.iter().enumerate() { load[c] += powers[i]; }
        let lpt_max = load.into_iter().fold(0.0, f64::max);
        prop_assert!(lpt_max <= (4.0 / 3.0 - 1.0 / (3.0 * k as f64)) * opt + 1e-9);
    }

    #[test]
    fn classes_partition_nodes_and_cut_is_exact(
        powers in prop::collection::vec(1u32..100, 2..=20),
        k in 2usize..=4,
    ) {
        prop_assume!(powers.len() >= k);
        let powers: Vec<f64> = powers.into_iter().map(f64::from).collect();
        let g = graph(&powers, 10.0);
        let plan = plan_partition(&g, k as u32).unwrap();
        let mut all: Vec<NodeId> = plan.classes.iter().flatten().copied().collect();
        all.sort();
        let mut expected: Vec<NodeId> = g.nodes.iter().map(|n| n.id).collect();
        expected.sort();
        prop_assert_eq!(all, expected);
        for e in &g.edges {
            let crossing = plan.class_of(e.a) != plan.class_of(e.b);
            prop_assert_eq!(crossing, plan.cut.contains(&(e.a, e.b)));
        }
        let total: f64 = plan.class_powers.iter().sum();
        prop_assert!((total - powers.iter().sum::<f64>()).abs() < 1e-6);
    }
}
