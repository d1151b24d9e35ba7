// SPDX-License-Identifier: Apache-2.0

use alloc::boxed::Box;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use serde::Serialize;

use super::{
    block_obliviousness_check, min_attack_delay, plan_partition, AttackError, AttackParams, PartitionPlan,
    RHO_TOLERANCE, TARGET_CLASS, VICTIM_CLASS,
};
use crate::chain::{BlockDag, BlockId, NodeId, Transaction, TxId};
use crate::consensus::{main_branch, tx_position, ConsensusConfig};
use crate::simnet::outcome::{class_lookup, delta_of, uncles};
use crate::simnet::{DelayInjection, MiningModel, NetworkGraph, RelayMode, Role, UncleCounts};
use crate::simnet::{MiningStrategy, Simulation, StrategyContext};
use crate::SimTime;

/// Id of the payment the attacker later reverts.
pub const VICTIM_TX: TxId = TxId(1);
/// Id of the conflicting payment issued once the victim branch lost.
pub const DOUBLE_SPEND_TX: TxId = TxId(2);

/// One attacker mining decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AttackerMove {
    pub at: SimTime,
    pub attacker: NodeId,
    pub parent: BlockId,
    /// Main-branch tip of a correct target-class miner at the same instant.
    pub target_tip: BlockId,
    pub blocks: u64,
}

/// Mines on the target class's rule tip, half a tick after correct miners,
/// once that tip is a block the victim cannot see.
struct BalanceMiner {
    window: (SimTime, SimTime),
    victim: NodeId,
    reference: Option<NodeId>,
    graft: Rc<RefCell<Option<BlockId>>>,
    moves: Rc<RefCell<Vec<AttackerMove>>>,
}

impl MiningStrategy for BalanceMiner {
    fn phase(&self, tick: SimTime) -> SimTime {
        SimTime::from_nanos(tick.as_nanos() / 2)
    }

    fn choose_parent(&mut self, ctx: &StrategyContext<'_>) -> Option<BlockId> {
        if ctx.now <= self.window.0 || ctx.now > self.window.1 {
            return None;
        }
        let tip = main_branch(ctx.own_view(), ctx.cfg()).tip();
        if ctx.view(self.victim).is_some_and(|v| v.contains(tip)) {
            return None;
        }
        self.graft.borrow_mut().get_or_insert(tip);
        let target_tip = self.reference.and_then(|r| ctx.view(r)).map_or(tip, |v| main_branch(v, ctx.cfg()).tip());
        self.moves.borrow_mut().push(AttackerMove {
            at: ctx.now,
            attacker: ctx.me,
            parent: tip,
            target_tip,
            blocks: ctx.found,
        });
        Some(tip)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackVerdict {
    pub seed: u64,
    pub tau: f64,
    pub window: (SimTime, SimTime),
    /// Victim tx committed in the victim view when the delay lifts.
    pub committed_before: bool,
    pub committed_then_reverted: bool,
    pub tx: TxId,
    /// Issued only once the victim branch lost.
    pub double_spend_tx: Option<TxId>,
    /// Correct blocks mined per class during the window.
    pub per_class_blocks: Vec<u64>,
    pub delta_observed: u64,
    pub attacker_blocks: u64,
    /// Class whose window blocks made it onto the settled main branch.
    pub winning_class: Option<usize>,
    /// First block the attacker mined on.
    pub graft: Option<BlockId>,
    pub uncle_counts: UncleCounts,
    pub success: bool,
}

/// Verdict plus the material needed to audit it.
#[derive(Clone, Debug)]
pub struct AttackReport {
    pub verdict: AttackVerdict,
    pub plan: PartitionPlan,
    pub moves: Vec<AttackerMove>,
    /// Victim view when the delay lifts.
    pub before: BlockDag,
    /// Victim view once the merge settled.
    pub after: BlockDag,
    pub final_dag: BlockDag,
}

pub fn execute_attack(
    graph: &NetworkGraph,
    mining: &MiningModel,
    cfg: &ConsensusConfig,
    params: &AttackParams,
    seed: u64,
) -> Result<AttackVerdict, AttackError> {
    execute_attack_detailed(graph, mining, cfg, params, seed).map(|r| r.verdict)
}

pub fn execute_attack_detailed(
    graph: &NetworkGraph,
    mining: &MiningModel,
    cfg: &ConsensusConfig,
    params: &AttackParams,
    seed: u64,
) -> Result<AttackReport, AttackError> {
    params.validate()?;
    if params.variant != cfg.rule {
        return Err(AttackError::VariantMismatch { variant: params.variant, rule: cfg.rule });
    }
    graph.validate()?;
    mining.validate()?;
    let actual = graph.attacker_fraction();
    if (actual - params.rho).abs() > RHO_TOLERANCE {
        return Err(AttackError::RhoMismatch { rho: params.rho, actual });
    }
    let attackers: Vec<NodeId> = graph.nodes.iter().filter(|n| n.role == Role::Attacker).map(|n| n.id).collect();
    let Some(&lead) = attackers.first() else {
        return Err(AttackError::NoAttacker);
    };
    let plan = plan_partition(graph, params.k)?;
    let tau = match params.tau {
        Some(tau) => tau,
        None => min_attack_delay(params, graph.total_power(), mining.difficulty)?,
    };

    let victims = &plan.classes[VICTIM_CLASS];
    let role = |n: NodeId| graph.node(n).map(|s| s.role);
    let merchant = victims
        .iter()
        .copied()
        .find(|&n| role(n) == Some(Role::Client))
        .or_else(|| victims.iter().copied().find(|&n| role(n) == Some(Role::Miner)))
        .ok_or(AttackError::TooFewMiners { needed: params.k as usize, found: 0 })?;
    let reference = plan.classes[TARGET_CLASS].iter().copied().find(|&n| role(n) == Some(Role::Miner));
    let accomplice = reference.unwrap_or(merchant);

    let injection = DelayInjection { cut: plan.cut.clone(), start: params.start, duration: tau };
    let window = injection.window();
    let mut sim = Simulation::new(graph.clone(), *mining, *cfg, &[injection], RelayMode::Gossip, seed)?;
    let graft = Rc::new(RefCell::new(None));
    let moves = Rc::new(RefCell::new(Vec::new()));
    for &a in &attackers {
        let strategy = BalanceMiner { window, victim: merchant, reference, graft: graft.clone(), moves: moves.clone() };
        sim.set_strategy(a, Box::new(strategy))?;
    }

    sim.run_until(window.0);
    sim.issue_tx(merchant, Transaction::new(VICTIM_TX, lead, merchant, 1)?)?;
    sim.run_until(window.1);
    let before = sim.view(merchant).expect("merchant exists").clone();
    let settle = window.1 + graph.latency_diameter();
    sim.run_until(settle);
    let after = sim.view(merchant).expect("merchant exists").clone();

    let committed_before = crate::consensus::is_committed(&before, cfg, VICTIM_TX);
    let committed_then_reverted = block_obliviousness_check(&before, &after, cfg, VICTIM_TX);
    let attacker_view = sim.view(lead).expect("attacker exists");
    let spendable = tx_position(attacker_view, &main_branch(attacker_view, cfg), VICTIM_TX).is_none();
    let double_spend_tx = if committed_before && spendable {
        sim.issue_tx(lead, Transaction::new(DOUBLE_SPEND_TX, lead, accomplice, 1)?.conflicting_with(VICTIM_TX))?;
        Some(DOUBLE_SPEND_TX)
    } else {
        None
    };

    let lookup = class_lookup(&plan.classes);
    let in_window = |t: SimTime| window.0 < t && t <= window.1;
    let mut per_class_blocks = vec![0u64; plan.classes.len()];
    let mut attacker_blocks = 0;
    for block in sim.minted().filter(|b| in_window(b.created_at)) {
        let miner = block.miner.expect("minted blocks have miners");
        if attackers.contains(&miner) {
            attacker_blocks += 1;
        } else if let Some(&c) = lookup.get(&miner) {
            per_class_blocks[c] += 1;
        }
    }
    let final_dag = sim.global_view();
    let winning_class = main_branch(&after, cfg)
        .blocks
        .iter()
        .filter_map(|&id| after.get(id))
        .find(|b| in_window(b.created_at))
        .and_then(|b| b.miner)
        .and_then(|m| lookup.get(&m).copied());
    let uncle_counts = uncles(&final_dag, cfg, &plan.classes, &attackers);

    let verdict = AttackVerdict {
        seed,
        tau,
        window,
        committed_before,
        committed_then_reverted,
        tx: VICTIM_TX,
        double_spend_tx,
        delta_observed: delta_of(&per_class_blocks),
        per_class_blocks,
        attacker_blocks,
        winning_class,
        graft: *graft.borrow(),
        uncle_counts,
        success: committed_then_reverted && spendable,
    };
    let moves = moves.borrow().clone();
    Ok(AttackReport { verdict, plan, moves, before, after, final_dag })
}
