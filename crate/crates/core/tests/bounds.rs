// SPDX-License-Identifier: Apache-2.0

use balance_core::analysis::{
    curve_sweep, exact_delta_tail, expected_means, general_k_bounds, general_min_delay, ghost_min_delay,
    ghost_success_bound, BoundInputs, SweepAxis,
};
use balance_core::chain::NodeId;
use balance_core::consensus::ConsensusConfig;
use balance_core::simnet::{run, DelayInjection, MiningModel, NetworkGraph, NodeSpec, RelayMode, Role};
use proptest::prelude::*;

proptest! {
    // Most small-mean tuples give a vacuous bound and are skipped.
    #![proptest_config(ProptestConfig { cases: 256, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn chernoff_bound_is_sound(n in 1u64..=200, p in 0.0f64..=0.1, delta in 0.05f64..0.95) {
        let mu = n as f64 * p;
        let bound = 1.0 - 4.0 * (-delta * delta * mu / 3.0).exp();
        prop_assume!(bound >= 0.0);
        let threshold = (2.0 * delta * mu).ceil() as u64;
        let exact = exact_delta_tail(n, p, threshold).unwrap();
        prop_assert!(exact >= bound, "n={} p={} delta={} exact={} bound={}", n, p, delta, exact, bound);
    }

    #[test]
    fn delay_and_bound_are_inverse(
        rho in 0.01f64..0.49,
        t in 1e3f64..1e8,
        d in 1e2f64..1e9,
        eps in 0.001f64..0.999,
    ) {
        let tau = ghost_min_delay(rho, t, d, eps).unwrap();
        let bound = ghost_success_bound(&BoundInputs::new(t, d, rho, 2, tau)).unwrap();
        prop_assert!(((bound - (1.0 - eps)) / (1.0 - eps)).abs() < 1e-12);
    }

    #[test]
    fn general_k_at_two_matches_ghost(rho in 0.01f64..0.49, tau in 0.0f64..5000.0) {
        let mut inputs = BoundInputs::new(20e6, 30e6, rho, 2, tau);
        inputs.delta = Some((2.0 * rho / (1.0 - rho)).min(0.999_999));
        prop_assume!(2.0 * rho / (1.0 - rho) < 1.0);
        let general = general_k_bounds(&inputs).unwrap().delta_bound;
        let ghost = ghost_success_bound(&inputs).unwrap();
        prop_assert!((general - ghost).abs() <= 1e-12 * ghost.abs().max(1e-300));
    }
}

#[test]
fn exact_tail_is_monotone_in_threshold() {
    let mut last = 0.0;
    for threshold in 0..60 {
        let v = exact_delta_tail(400, 0.05, threshold).unwrap();
        assert!(v >= last);
        last = v;
    }
    assert!((last - 1.0).abs() < 1e-9);
}

#[test]
fn fixed_delta_delay_grows_with_k() {
    let taus: Vec<f64> =
        [2, 3, 4, 8].iter().map(|&k| general_min_delay(k, 0.12, 20e6, 30e6, 0.1, Some(0.2)).unwrap()).collect();
    assert!(taus.windows(2).all(|w| w[0] < w[1]), "{taus:?}");
}

#[test]
fn sweeps_order_by_rho_and_difficulty() {
    let base = BoundInputs::new(20e6, 30e6, 0.12, 2, 0.0);
    let low = curve_sweep(&base, SweepAxis::Tau, 0.0, 3600.0, 30.0).unwrap();
    let high = curve_sweep(&BoundInputs { rho: 0.2, ..base }, SweepAxis::Tau, 0.0, 3600.0, 30.0).unwrap();
    let easy = curve_sweep(&BoundInputs { d: 15e6, ..base }, SweepAxis::Tau, 0.0, 3600.0, 30.0).unwrap();
    for i in 0..low.len() {
        assert!(high[i].bound >= low[i].bound && easy[i].bound >= low[i].bound);
    }
    let rho_axis = curve_sweep(&BoundInputs { tau: 600.0, ..base }, SweepAxis::Rho, 0.01, 0.49, 0.01).unwrap();
    assert!(rho_axis.windows(2).all(|w| w[0].bound <= w[1].bound));
}

/// Empirical Pr[Delta < mu_m] against the mu_m-threshold bound.
#[test]
fn simulated_difference_respects_the_bound() {
    // t = 1000 H/s with rho = 0.3, d = 100, tau = 20 s: mu_c = 70, mu_m = 60.
    let mut nodes: Vec<NodeSpec> =
        (1..=4).map(|i| NodeSpec { id: NodeId(i), mining_power: 175.0, role: Role::Miner }).collect();
    nodes.push(NodeSpec { id: NodeId(9), mining_power: 300.0, role: Role::Attacker });
    let graph = NetworkGraph::full_mesh(nodes, 0.01);
    let inputs = BoundInputs::new(1000.0, 100.0, 0.3, 2, 20.0);
    let means = expected_means(&inputs);
    let bound = general_k_bounds(&inputs).unwrap().mu_m_threshold_bound.unwrap();
    let left = [NodeId(1), NodeId(2), NodeId(9)];
    let cut: Vec<_> =
        graph.edges.iter().filter(|e| left.contains(&e.a) != left.contains(&e.b)).map(|e| (e.a, e.b)).collect();
    let inj = [DelayInjection { cut, start: 0.0, duration: 20.0 }];
    let mining = MiningModel::new(100.0, 0.1).unwrap();
    let runs = 1000;
    let hits = (0..runs)
        .filter(|&seed| {
            let out = run(&graph, &mining, &ConsensusConfig::ghost(), &inj, RelayMode::Gossip, 20.0, seed).unwrap();
            (out.delta as f64) < means.mu_m
        })
        .count();
    let freq = hits as f64 / runs as f64;
    let sigma = (bound * (1.0 - bound) / runs as f64).sqrt();
    assert!(freq >= bound - 3.0 * sigma, "freq {freq} bound {bound}");
}
