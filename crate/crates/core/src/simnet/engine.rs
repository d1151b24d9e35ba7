// SPDX-License-Identifier: Apache-2.0

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{DelayInjection, MiningModel, NetworkGraph, RelayMode, Role, SimError};
use crate::chain::{Block, BlockDag, BlockId, NodeId, Transaction, TxId};
use crate::consensus::{main_branch, ConsensusConfig};
use crate::SimTime;

/// Genesis id shared by every view.
pub const GENESIS: BlockId = BlockId(0);

/// Replaces honest tip selection for one node.
pub trait MiningStrategy {
    /// Offset of this node's mining rounds from the shared tick grid; must be
    /// smaller than the tick.
    fn phase(&self, tick: SimTime) -> SimTime;

    /// Block to extend this round, or `None` to let the discovered blocks go
    /// unused. Called only in rounds where the node found at least one block.
    fn choose_parent(&mut self, ctx: &StrategyContext<'_>) -> Option<BlockId>;
}

/// Read-only access to the running simulation for a [`MiningStrategy`].
pub struct StrategyContext<'a> {
    pub now: SimTime,
    pub me: NodeId,
    pub found: u64,
    sim: &'a Simulation,
}

impl StrategyContext<'_> {
    pub fn own_view(&self) -> &BlockDag {
        self.sim.view(self.me).expect("strategy node exists")
    }

    pub fn view(&self, node: NodeId) -> Option<&BlockDag> {
        self.sim.view(node)
    }

    pub fn cfg(&self) -> &ConsensusConfig {
        &self.sim.cfg
    }
}

#[derive(Clone)]
enum Message {
    Block(Rc<Block>),
    Tx(Rc<Transaction>),
}

enum Event {
    Round(u64),
    StrategyRound { node: usize, round: u64 },
    Deliver { to: usize, from: Option<usize>, msg: Message },
}

struct Scheduled {
    time: SimTime,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

struct Link {
    to: usize,
    latency: SimTime,
    edge: usize,
}

struct NodeState {
    id: NodeId,
    role: Role,
    rng: ChaCha8Rng,
    per_tick: Option<Binomial>,
    links: Vec<Link>,
    view: BlockDag,
    mempool: BTreeMap<TxId, Rc<Transaction>>,
    /// Transactions contained in any block this node knows.
    mined_txs: BTreeSet<TxId>,
    strategy: Option<Box<dyn MiningStrategy>>,
}

/// A single deterministic simulation run.
///
/// Events at equal times run in scheduling order, so `(inputs, seed)` fully
/// determines the run.
pub struct Simulation {
    graph: NetworkGraph,
    mining: MiningModel,
    cfg: ConsensusConfig,
    relay: RelayMode,
    nodes: Vec<NodeState>,
    index: BTreeMap<NodeId, usize>,
    /// Hold windows per edge index.
    holds: Vec<Vec<(SimTime, SimTime)>>,
    queue: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
    now: SimTime,
    tick: SimTime,
    next_block: u64,
    minted: Vec<Rc<Block>>,
    issued: BTreeSet<TxId>,
}

impl Simulation {
    pub fn new(
        graph: NetworkGraph,
        mining: MiningModel,
        cfg: ConsensusConfig,
        injections: &[DelayInjection],
        relay: RelayMode,
        seed: u64,
    ) -> Result<Self, SimError> {
        graph.validate()?;
        mining.validate()?;
        let index: BTreeMap<NodeId, usize> = graph.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut holds = alloc::vec![Vec::new(); graph.edges.len()];
        for inj in injections {
            if !(inj.start >= 0.0) || !(inj.duration >= 0.0) {
                return Err(SimError::InvalidConfig("injection start and duration must be non-negative"));
            }
            let window = inj.window();
            for &(x, y) in &inj.cut {
                let edge = graph.edge_index(x, y).ok_or(SimError::UnknownEdge(x, y))?;
                if window.0 < window.1 {
                    holds[edge].push(window);
                }
            }
        }
        for windows in &mut holds {
            windows.sort();
        }
        let nodes = graph
            .nodes
            .iter()
            .map(|spec| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(u64::from(spec.id.0));
                let links = graph
                    .edges
                    .iter()
                    .enumerate()
                    .filter_map(|(edge, e)| {
                        let other = if e.a == spec.id {
                            e.b
                        } else if e.b == spec.id {
                            e.a
                        } else {
                            return None;
                        };
                        Some(Link { to: index[&other], latency: SimTime::from_secs_f64(e.latency), edge })
                    })
                    .collect();
                NodeState {
                    id: spec.id,
                    role: spec.role,
                    rng,
                    per_tick: mining.per_tick_distribution(spec.mining_power),
                    links,
                    view: BlockDag::new(GENESIS),
                    mempool: BTreeMap::new(),
                    mined_txs: BTreeSet::new(),
                    strategy: None,
                }
            })
            .collect();
        let tick = SimTime::from_secs_f64(mining.tick);
        let mut sim = Simulation {
            graph,
            mining,
            cfg,
            relay,
            nodes,
            index,
            holds,
            queue: BinaryHeap::new(),
            seq: 0,
            now: SimTime::ZERO,
            tick,
            next_block: GENESIS.0 + 1,
            minted: Vec::new(),
            issued: BTreeSet::new(),
        };
        sim.schedule(tick, Event::Round(1));
        Ok(sim)
    }

    /// Hands tip selection for `node` to `strategy` from now on.
    pub fn set_strategy(&mut self, node: NodeId, strategy: Box<dyn MiningStrategy>) -> Result<(), SimError> {
        let idx = *self.index.get(&node).ok_or(SimError::UnknownNode(node))?;
        let phase = strategy.phase(self.tick);
        if phase >= self.tick {
            return Err(SimError::InvalidConfig("strategy phase must be shorter than the tick"));
        }
        let had_strategy = self.nodes[idx].strategy.replace(strategy).is_some();
        if !had_strategy {
            // First round strictly after now on the shifted grid.
            let mut round = self.now.as_nanos() / self.tick.as_nanos();
            while SimTime::from_nanos(round * self.tick.as_nanos()) + phase <= self.now {
                round += 1;
            }
            let at = SimTime::from_nanos(round * self.tick.as_nanos()) + phase;
            self.schedule(at, Event::StrategyRound { node: idx, round });
        }
        Ok(())
    }

    /// Drops `tx` into `node`'s mempool right away and relays it from there.
    pub fn issue_tx(&mut self, node: NodeId, tx: Transaction) -> Result<(), SimError> {
        let idx = *self.index.get(&node).ok_or(SimError::UnknownNode(node))?;
        if !self.issued.insert(tx.id) {
            return Err(SimError::DuplicateTx(tx.id));
        }
        self.receive(idx, None, Message::Tx(Rc::new(tx)));
        Ok(())
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn mining(&self) -> &MiningModel {
        &self.mining
    }

    pub fn cfg(&self) -> &ConsensusConfig {
        &self.cfg
    }

    pub fn view(&self, node: NodeId) -> Option<&BlockDag> {
        self.index.get(&node).map(|&i| &self.nodes[i].view)
    }

    pub fn role(&self, node: NodeId) -> Option<Role> {
        self.index.get(&node).map(|&i| self.nodes[i].role)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    /// Every block minted so far, in minting order.
    pub fn minted(&self) -> impl Iterator<Item = &Block> {
        self.minted.iter().map(|b| b.as_ref())
    }

    /// Union of all node views.
    pub fn global_view(&self) -> BlockDag {
        let mut global = BlockDag::new(GENESIS);
        for node in &self.nodes {
            global.absorb(&node.view).expect("views share genesis and never conflict");
        }
        global
    }

    /// Blocks carried by messages not yet delivered.
    pub fn in_flight_blocks(&self) -> BTreeSet<BlockId> {
        self.queue
            .iter()
            .filter_map(|Reverse(s)| match &s.event {
                Event::Deliver { msg: Message::Block(b), .. } => Some(b.id),
                _ => None,
            })
            .collect()
    }

    /// Processes every event scheduled at or before `until`.
    pub fn run_until(&mut self, until: SimTime) {
        while let Some(Reverse(next)) = self.queue.peek() {
            if next.time > until {
                break;
            }
            let Reverse(scheduled) = self.queue.pop().expect("peeked");
            self.now = scheduled.time;
            self.dispatch(scheduled.event);
        }
        self.now = self.now.max(until);
    }

    fn schedule(&mut self, time: SimTime, event: Event) {
        self.seq += 1;
        self.queue.push(Reverse(Scheduled { time, seq: self.seq, event }));
    }

    fn dispatch(&mut self, event: Event) {
        match event {
            Event::Round(round) => {
                for idx in 0..self.nodes.len() {
                    if self.nodes[idx].strategy.is_none() {
                        self.honest_round(idx);
                    }
                }
                let next = SimTime::from_nanos((round + 1) * self.tick.as_nanos());
                self.schedule(next, Event::Round(round + 1));
            }
            Event::StrategyRound { node, round } => {
                self.strategy_round(node);
                let phase = self.nodes[node].strategy.as_ref().map(|s| s.phase(self.tick));
                if let Some(phase) = phase {
                    let next = SimTime::from_nanos((round + 1) * self.tick.as_nanos()) + phase;
                    self.schedule(next, Event::StrategyRound { node, round: round + 1 });
                }
            }
            Event::Deliver { to, from, msg } => self.receive(to, from, msg),
        }
    }

    fn draw(&mut self, idx: usize) -> u64 {
        let node = &mut self.nodes[idx];
        match &node.per_tick {
            Some(dist) => dist.sample(&mut node.rng),
            None => 0,
        }
    }

    fn honest_round(&mut self, idx: usize) {
        let found = self.draw(idx);
        if found == 0 {
            return;
        }
        let tip = main_branch(&self.nodes[idx].view, &self.cfg).tip();
        self.mint(idx, tip, found);
    }

    fn strategy_round(&mut self, idx: usize) {
        let found = self.draw(idx);
        if found == 0 {
            return;
        }
        let Some(mut strategy) = self.nodes[idx].strategy.take() else {
            return;
        };
        let ctx = StrategyContext { now: self.now, me: self.nodes[idx].id, found, sim: self };
        let parent = strategy.choose_parent(&ctx);
        self.nodes[idx].strategy = Some(strategy);
        if let Some(parent) = parent {
            if self.nodes[idx].view.contains(parent) {
                self.mint(idx, parent, found);
            }
        }
    }

    /// Appends `count` consecutive blocks on `parent`; the first carries the
    /// node's eligible mempool transactions.
    fn mint(&mut self, idx: usize, parent: BlockId, count: u64) {
        let mut txs = self.select_txs(idx);
        let mut parent = self.nodes[idx].view.get(parent).expect("parent attached").clone();
        for _ in 0..count {
            let id = BlockId(self.next_block);
            self.next_block += 1;
            let block = Block::child_of(&parent, id, self.nodes[idx].id, self.now).with_txs(core::mem::take(&mut txs));
            let block = Rc::new(block);
            self.minted.push(block.clone());
            self.learn_block(idx, &block);
            self.broadcast(idx, None, Message::Block(block.clone()));
            parent = (*block).clone();
        }
    }

    fn select_txs(&mut self, idx: usize) -> Vec<TxId> {
        let node = &mut self.nodes[idx];
        node.mempool.retain(|id, _| !node.mined_txs.contains(id));
        if node.mempool.is_empty() {
            return Vec::new();
        }
        let branch = main_branch(&node.view, &self.cfg);
        let on_branch: BTreeSet<TxId> =
            branch.blocks.iter().flat_map(|&b| node.view.get(b).expect("branch block").txs.iter().copied()).collect();
        let mut chosen: Vec<TxId> = Vec::new();
        for tx in node.mempool.values() {
            let clashes = tx.conflicts_with.is_some_and(|other| on_branch.contains(&other) || chosen.contains(&other));
            let reverse_clash =
                chosen.iter().any(|c| node.mempool.get(c).and_then(|t| t.conflicts_with) == Some(tx.id));
            if !clashes && !reverse_clash {
                chosen.push(tx.id);
            }
        }
        chosen
    }

    fn learn_block(&mut self, idx: usize, block: &Block) -> bool {
        let node = &mut self.nodes[idx];
        let outcome = node.view.insert(block.clone()).expect("simulator blocks are consistent");
        if outcome.is_new() {
            node.mined_txs.extend(block.txs.iter().copied());
        }
        outcome.is_new()
    }

    fn receive(&mut self, idx: usize, from: Option<usize>, msg: Message) {
        let fresh = match &msg {
            Message::Block(block) => !self.nodes[idx].view.knows(block.id) && self.learn_block(idx, block),
            Message::Tx(tx) => {
                let node = &mut self.nodes[idx];
                if node.mempool.contains_key(&tx.id) || node.mined_txs.contains(&tx.id) {
                    false
                } else {
                    node.mempool.insert(tx.id, tx.clone());
                    true
                }
            }
        };
        let relay = from.is_none() || self.relay == RelayMode::Gossip;
        if fresh && relay {
            self.broadcast(idx, from, msg);
        }
    }

    fn broadcast(&mut self, idx: usize, except: Option<usize>, msg: Message) {
        for l in 0..self.nodes[idx].links.len() {
            let link = &self.nodes[idx].links[l];
            if Some(link.to) == except {
                continue;
            }
            let (to, edge, latency) = (link.to, link.edge, link.latency);
            let at = self.arrival(edge, latency);
            self.schedule(at, Event::Deliver { to, from: Some(idx), msg: msg.clone() });
        }
    }

    /// Delivery time of a message sent now over `edge`, honoring hold windows.
    fn arrival(&self, edge: usize, latency: SimTime) -> SimTime {
        let mut sent = self.now;
        let mut arrive = sent + latency;
        for &(start, end) in &self.holds[edge] {
            let sent_inside = start <= sent && sent < end;
            let lands_inside = start <= arrive && arrive < end;
            if sent_inside || lands_inside {
                sent = end;
                arrive = end + latency;
            }
        }
        arrive
    }
}
