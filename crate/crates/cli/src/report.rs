// SPDX-License-Identifier: Apache-2.0

//! CSV rows, batch summaries and run metadata.

use std::fmt::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use balance_core::analysis::SweepPoint;
use balance_core::attack::AttackVerdict;
use balance_core::simnet::SimulationOutcome;
use serde::Serialize;

pub const SWEEP_SCHEMA: &str = "balance.sweep.v1";
pub const VERDICT_SCHEMA: &str = "balance.verdicts.v1";
pub const OUTCOME_SCHEMA: &str = "balance.outcomes.v1";
pub const SUMMARY_SCHEMA: &str = "balance.summary.v1";

/// 95% Wilson score interval for `hits` out of `n`.
pub fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = hits as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z * z / (4.0 * n)) / n).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn joined(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = format!("#schema={SWEEP_SCHEMA}\nx,bound,vacuous\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.x, p.bound, p.vacuous);
    }
    out
}

pub fn verdict_csv(rows: &[AttackVerdict]) -> String {
    let mut out = format!(
        "#schema={VERDICT_SCHEMA}\nseed,success,committed_before,committed_then_reverted,delta_observed,\
         attacker_blocks,attacker_beats_delta,winning_class,attacker_uncles,tau,class_blocks\n"
    );
    for v in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            v.seed,
            v.success,
            v.committed_before,
            v.committed_then_reverted,
            v.delta_observed,
            v.attacker_blocks,
            v.attacker_blocks > v.delta_observed,
            opt(v.winning_class),
            v.uncle_counts.attacker,
            v.tau,
            joined(&v.per_class_blocks)
        );
    }
    out
}

pub fn outcome_csv(rows: &[(u64, SimulationOutcome)]) -> String {
    let mut out = format!(
        "#schema={OUTCOME_SCHEMA}\nseed,delta,attacker_blocks,adopted_origin,reverted_commit,\
         main_branch_len,attacker_uncles,class_blocks\n"
    );
    for (seed, o) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            seed,
            o.delta,
            o.attacker_blocks,
            opt(o.adopted_origin),
            o.reverted_commit,
            o.main_branch_len,
            o.uncle_counts.attacker,
            joined(&o.per_subgraph_blocks)
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rate {
    pub count: u64,
    pub rate: f64,
    pub wilson95: (f64, f64),
}

impl Rate {
    pub fn of(count: u64, n: u64) -> Rate {
        let rate = if n == 0 { 0.0 } else { count as f64 / n as f64 };
        Rate { count, rate, wilson95: wilson_interval(count, n) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackSummary {
    pub schema: &'static str,
    pub scenario: Option<String>,
    pub runs: u64,
    pub tau: f64,
    pub success: Rate,
    pub committed_then_reverted: Rate,
    pub attacker_beats_delta: Rate,
    pub target_side_won: Rate,
    pub attacker_uncles_total: u64,
    pub mean_delta: f64,
    pub mean_attacker_blocks: f64,
}

impl AttackSummary {
    pub fn of(scenario: Option<String>, rows: &[AttackVerdict]) -> Self {
        let n = rows.len() as u64;
        let count = |f: &dyn Fn(&AttackVerdict) -> bool| rows.iter().filter(|v| f(v)).count() as u64;
        let mean = |f: &dyn Fn(&AttackVerdict) -> u64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<u64>() as f64 / n as f64
            }
        };
        AttackSummary {
            schema: SUMMARY_SCHEMA,
            scenario,
            runs: n,
            tau: rows.first().map_or(0.0, |v| v.tau),
            success: Rate::of(count(&|v| v.success), n),
            committed_then_reverted: Rate::of(count(&|v| v.committed_then_reverted), n),
            attacker_beats_delta: Rate::of(count(&|v| v.attacker_blocks > v.delta_observed), n),
            target_side_won: Rate::of(count(&|v| v.winning_class == Some(0)), n),
            attacker_uncles_total: rows.iter().map(|v| v.uncle_counts.attacker).sum(),
            mean_delta: mean(&|v| v.delta_observed),
            mean_attacker_blocks: mean(&|v| v.attacker_blocks),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeSummary {
    pub schema: &'static str,
    pub scenario: Option<String>,
    pub runs: u64,
    pub reverted_commit: Rate,
    pub mean_delta: f64,
    pub mean_main_branch_len: f64,
}

impl OutcomeSummary {
    pub fn of(scenario: Option<String>, rows: &[(u64, SimulationOutcome)]) -> Self {
        let n = rows.len() as u64;
        let denom = n.max(1) as f64;
        OutcomeSummary {
            schema: SUMMARY_SCHEMA,
            scenario,
            runs: n,
            reverted_commit: Rate::of(rows.iter().filter(|r| r.1.reverted_commit).count() as u64, n),
            mean_delta: rows.iter().map(|r| r.1.delta).sum::<u64>() as f64 / denom,
            mean_main_branch_len: rows.iter().map(|r| r.1.main_branch_len as u64).sum::<u64>() as f64 / denom,
        }
    }
}

/// Provenance kept next to batch outputs, outside the deterministic files.
#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub created_unix: u64,
    pub scenario: Option<String>,
    pub seeds: Vec<u64>,
}

impl RunMeta {
    pub fn now(scenario: Option<String>, seeds: Vec<u64>) -> Self {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        RunMeta { tool: "balance", version: env!("CARGO_PKG_VERSION"), created_unix, scenario, seeds }
    }
}
