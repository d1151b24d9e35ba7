// SPDX-License-Identifier: Apache-2.0

//! Built-in scenarios. Testbed hardware constants live only here.

use balance_core::consensus::ForkRule;
use balance_core::simnet::{RelayMode, Role};

use crate::scenario::{
    AttackSection, ConsensusSection, MiningSection, NetworkSection, NodeEntry, RunSection, Scenario,
};
use crate::units::Quantity;

pub const NAMES: [&str; 3] = ["r3", "emulab", "ethereum-default"];

pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "r3" => Some(r3()),
        "emulab" => Some(emulab()),
        "ethereum-default" => Some(ethereum_default()),
        _ => None,
    }
}

fn node(id: u32, power: Quantity, role: Role) -> NodeEntry {
    NodeEntry { id, power, role }
}

fn clients(first: u32, count: u32) -> impl Iterator<Item = NodeEntry> {
    (first..first + count).map(|id| node(id, Quantity::Number(0.0), Role::Client))
}

fn ghost_attack(rho: f64, tau: Quantity) -> AttackSection {
    AttackSection {
        rho,
        k: 2,
        epsilon: 0.1,
        tau,
        delta: None,
        variant: Some(ForkRule::Ghost),
        pi: None,
        start: Quantity::Number(0.0),
    }
}

fn base(name: &str, nodes: Vec<NodeEntry>, difficulty: &str, tick: &str, horizon: &str) -> Scenario {
    Scenario {
        name: Some(name.to_owned()),
        network: NetworkSection { nodes, edges: Vec::new(), full_mesh_latency: Some("20 ms".into()) },
        mining: MiningSection { difficulty: difficulty.into(), tick: tick.into() },
        consensus: ConsensusSection { rule: ForkRule::Ghost, m: Some(11) },
        injections: Vec::new(),
        relay: RelayMode::Gossip,
        horizon: horizon.into(),
        seed: 1,
        attack: None,
        run: None,
    }
}

/// 50 nodes: a 2.4 MH/s attacker, seven pairs of equal miners totalling
/// 17.6 MH/s, 35 clients; difficulty 30 MH.
fn r3() -> Scenario {
    let mut nodes = vec![node(0, "2.4 MH/s".into(), Role::Attacker)];
    let pairs = ["2.0", "1.8", "1.5", "1.2", "0.9", "0.8", "0.6"];
    let mut id = 1;
    for p in pairs {
        for _ in 0..2 {
            nodes.push(node(id, format!("{p} MH/s").as_str().into(), Role::Miner));
            id += 1;
        }
    }
    nodes.extend(clients(15, 35));
    let mut s = base("r3", nodes, "30 MH", "1 s", "30 min");
    s.attack = Some(ghost_attack(0.12, "auto".into()));
    s.run = Some(RunSection { seeds: None, seed_count: Some(100), out: None });
    s
}

/// Fifteen equal miners, one of them the attacker, and two clients; the
/// attacker delays the cut for one minute.
fn emulab() -> Scenario {
    let mut nodes = vec![node(0, "5 kH/s".into(), Role::Attacker)];
    nodes.extend((1..=14).map(|id| node(id, "5 kH/s".into(), Role::Miner)));
    nodes.extend(clients(15, 2));
    let mut s = base("emulab", nodes, "40 KH", "1 s", "5 min");
    s.attack = Some(ghost_attack(1.0 / 15.0, "60 s".into()));
    s.run = Some(RunSection { seeds: None, seed_count: Some(200), out: None });
    s
}

/// Desk-scale network at difficulty 4000 with 15 kH/s in total, 12% of it
/// held by the attacker.
fn ethereum_default() -> Scenario {
    let mut nodes = vec![node(0, "1.8 kH/s".into(), Role::Attacker)];
    let per_miner = 13_200.0 / 14.0;
    nodes.extend((1..=14).map(|id| node(id, Quantity::Number(per_miner), Role::Miner)));
    nodes.extend(clients(15, 2));
    let mut s = base("ethereum-default", nodes, "4000", "100 ms", "5 min");
    s.attack = Some(ghost_attack(0.12, "auto".into()));
    s.run = Some(RunSection { seeds: None, seed_count: Some(1000), out: None });
    s
}
