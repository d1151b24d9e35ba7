// SPDX-License-Identifier: Apache-2.0

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::chain::NodeId;
use crate::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Miner,
    Client,
    Attacker,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    /// Hashes per second.
    pub mining_power: f64,
    pub role: Role,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a: NodeId,
    pub b: NodeId,
    /// One-way latency in seconds.
    pub latency: f64,
}

impl EdgeSpec {
    pub fn joins(&self, x: NodeId, y: NodeId) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

/// Static communication graph.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkGraph {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl NetworkGraph {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.nodes.is_empty() {
            return Err(SimError::InvalidConfig("graph has no nodes"));
        }
        let mut seen = BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id) {
                return Err(SimError::DuplicateNode(node.id));
            }
            if !(node.mining_power >= 0.0) || !node.mining_power.is_finite() {
                return Err(SimError::InvalidConfig("mining power must be finite and non-negative"));
            }
        }
        let mut pairs = BTreeSet::new();
        for edge in &self.edges {
            for end in [edge.a, edge.b] {
                if !seen.contains(&end) {
                    return Err(SimError::UnknownNode(end));
                }
            }
            if edge.a == edge.b {
                return Err(SimError::InvalidConfig("self-loop edge"));
            }
            if !(edge.latency >= 0.0) || !edge.latency.is_finite() {
                return Err(SimError::InvalidConfig("latency must be finite and non-negative"));
            }
            if !pairs.insert((edge.a.min(edge.b), edge.a.max(edge.b))) {
                return Err(SimError::InvalidConfig("duplicate edge"));
            }
        }
        if self.components_without(&[]).len() != 1 {
            return Err(SimError::InvalidConfig("graph is not connected"));
        }
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn total_power(&self) -> f64 {
        self.nodes.iter().map(|n| n.mining_power).sum()
    }

    pub fn attacker_power(&self) -> f64 {
        self.nodes.iter().filter(|n| n.role == Role::Attacker).map(|n| n.mining_power).sum()
    }

    /// Attacker share of the total mining power (0 when nobody mines).
    pub fn attacker_fraction(&self) -> f64 {
        let total = self.total_power();
        if total > 0.0 {
            self.attacker_power() / total
        } else {
            0.0
        }
    }

    pub fn edge_index(&self, x: NodeId, y: NodeId) -> Option<usize> {
        self.edges.iter().position(|e| e.joins(x, y))
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.a == id {
                Some((e.b, e.latency))
            } else if e.b == id {
                Some((e.a, e.latency))
            } else {
                None
            }
        })
    }

    /// Connected components once the given edges are removed, each sorted,
    /// ordered by their smallest node id.
    pub fn components_without(&self, removed: &[(NodeId, NodeId)]) -> Vec<Vec<NodeId>> {
        let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = self.nodes.iter().map(|n| (n.id, Vec::new())).collect();
        for e in &self.edges {
            if removed.iter().any(|&(x, y)| e.joins(x, y)) {
                continue;
            }
            if let Some(v) = adjacency.get_mut(&e.a) {
                v.push(e.b);
            }
            if let Some(v) = adjacency.get_mut(&e.b) {
                v.push(e.a);
            }
        }
        let mut visited = BTreeSet::new();
        let mut components = Vec::new();
        for &start in adjacency.keys() {
            if !visited.insert(start) {
                continue;
            }
            let mut component = vec![start];
            let mut stack = vec![start];
            while let Some(n) = stack.pop() {
                for &m in &adjacency[&n] {
                    if visited.insert(m) {
                        component.push(m);
                        stack.push(m);
                    }
                }
            }
            component.sort();
            components.push(component);
        }
        components
    }

    /// Largest shortest-path latency between any two nodes.
    pub fn latency_diameter(&self) -> SimTime {
        let ids: Vec<NodeId> = self.nodes.iter().map(|n| n.id).collect();
        let mut worst = SimTime::ZERO;
        for &source in &ids {
            let mut dist: BTreeMap<NodeId, SimTime> = BTreeMap::new();
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((SimTime::ZERO, source)));
            while let Some(Reverse((d, n))) = heap.pop() {
                if dist.contains_key(&n) {
                    continue;
                }
                dist.insert(n, d);
                for (m, latency) in self.neighbors(n) {
                    if !dist.contains_key(&m) {
                        heap.push(Reverse((d + SimTime::from_secs_f64(latency), m)));
                    }
                }
            }
            if let Some(&d) = dist.values().max() {
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Complete graph over `nodes` with uniform latency.
    pub fn full_mesh(nodes: Vec<NodeSpec>, latency: f64) -> Self {
        let mut edges = Vec::new();
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                edges.push(EdgeSpec { a: a.id, b: b.id, latency });
            }
        }
        NetworkGraph { nodes, edges }
    }
}
