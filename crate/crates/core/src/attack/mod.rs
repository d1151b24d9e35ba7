// SPDX-License-Identifier: Apache-2.0

//! Balance attack orchestration: partition planning, the delay bound, the
//! attacker's mining strategy and the block-obliviousness verdict.

mod execute;
mod partition;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{general_min_delay, ghost_min_delay, AnalysisError};
use crate::chain::{BlockDag, ChainError, TxId};
use crate::consensus::{is_committed, main_branch, tx_position, ConsensusConfig, ForkRule};
use crate::simnet::SimError;

pub use execute::{execute_attack, execute_attack_detailed, AttackReport, AttackVerdict, AttackerMove, VICTIM_TX};
pub use partition::{
    exhaustive_assign, lpt_assign, plan_partition, PartitionPlan, EXHAUSTIVE_LIMIT, TARGET_CLASS, VICTIM_CLASS,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AttackError {
    #[error("invalid attack parameters: {0}")]
    InvalidParams(&'static str),
    #[error("need at least {needed} correct miners, found {found}")]
    TooFewMiners { needed: usize, found: usize },
    #[error("attack variant {variant:?} does not match fork rule {rule:?}")]
    VariantMismatch { variant: ForkRule, rule: ForkRule },
    #[error("rho {rho} disagrees with the attacker share {actual} of the graph")]
    RhoMismatch { rho: f64, actual: f64 },
    #[error("the graph has no attacker node")]
    NoAttacker,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Largest tolerated gap between `rho` and the graph's attacker share.
pub const RHO_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackParams {
    /// Attacker share of the total mining power, in `[0, 0.5)`.
    pub rho: f64,
    pub k: u32,
    pub epsilon: f64,
    /// Delay in seconds; derived from `epsilon` when absent.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Deviation factor for `k > 2`; derived when absent.
    #[serde(default)]
    pub delta: Option<f64>,
    pub variant: ForkRule,
    /// Longest-tip probability, nakamoto variant only.
    #[serde(default)]
    pub pi: Option<f64>,
    /// Injection start, seconds.
    #[serde(default)]
    pub start: f64,
}

impl AttackParams {
    pub fn ghost(rho: f64, epsilon: f64) -> Self {
        AttackParams { rho, k: 2, epsilon, tau: None, delta: None, variant: ForkRule::Ghost, pi: None, start: 0.0 }
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        if !(0.0..0.5).contains(&self.rho) {
            return Err(AttackError::InvalidParams("rho must lie in [0, 0.5)"));
        }
        if self.k < 2 {
            return Err(AttackError::InvalidParams("k must be at least 2"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(AttackError::InvalidParams("epsilon must lie in (0, 1)"));
        }
        if self.tau.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
            return Err(AttackError::InvalidParams("tau must be non-negative"));
        }
        if self.delta.is_some_and(|d| !(d > 0.0 && d < 1.0)) {
            return Err(AttackError::InvalidParams("delta must lie in (0, 1)"));
        }
        if !(self.start >= 0.0 && self.start.is_finite()) {
            return Err(AttackError::InvalidParams("start must be non-negative"));
        }
        match (self.variant, self.pi) {
            (ForkRule::Nakamoto, None) => return Err(AttackError::InvalidParams("nakamoto variant needs pi")),
            (_, Some(pi)) if !(pi > 0.0 && pi <= 1.0) => {
                return Err(AttackError::InvalidParams("pi must lie in (0, 1]"))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Delay needed for the attacker to out-mine the subgraph difference with
/// probability at least `1 - epsilon`, given total power `t` and difficulty `d`.
///
/// With the nakamoto variant and `k = 2`, the main-branch mean is scaled by
/// `1/pi`, so the delay shrinks by the factor `pi`.
pub fn min_attack_delay(params: &AttackParams, t: f64, d: f64) -> Result<f64, AttackError> {
    params.validate()?;
    if params.rho == 0.0 {
        return Err(AttackError::InvalidParams("rho = 0 admits no finite delay"));
    }
    if !(t > 0.0 && d > 0.0) {
        return Err(AttackError::InvalidParams("t and d must be positive"));
    }
    if params.k == 2 {
        let tau = ghost_min_delay(params.rho, t, d, params.epsilon)?;
        return Ok(match params.variant {
            ForkRule::Ghost => tau,
            ForkRule::Nakamoto => tau * params.pi.unwrap_or(1.0),
        });
    }
    Ok(general_min_delay(params.k, params.rho, t, d, params.epsilon, params.delta)?)
}

/// `tx` was committed in `before` yet neither committed nor on the main
/// branch of `after`.
pub fn block_obliviousness_check(before: &BlockDag, after: &BlockDag, cfg: &ConsensusConfig, tx: TxId) -> bool {
    if !is_committed(before, cfg, tx) || is_committed(after, cfg, tx) {
        return false;
    }
    tx_position(after, &main_branch(after, cfg), tx).is_none()
}
