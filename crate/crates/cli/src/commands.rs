// SPDX-License-Identifier: Apache-2.0

//! Subcommand bodies, independent of argument parsing.

use std::fs;
use std::path::{Path, PathBuf};

use balance_core::analysis::{
    bitcoin_mean, curve_sweep, expected_means, general_k_bounds, success_report, BoundInputs, BoundReport, SweepAxis,
    SweepPoint,
};
use balance_core::attack::{execute_attack, execute_attack_detailed, min_attack_delay, AttackParams, AttackVerdict};
use balance_core::consensus::ForkRule;
use balance_core::simnet::{run, SimulationOutcome};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{outcome_csv, verdict_csv, AttackSummary, OutcomeSummary, RunMeta};
use crate::scenario::{Resolved, Scenario};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub inputs: BoundInputs,
    pub rule: ForkRule,
    pub mu_c: f64,
    pub mu_m: f64,
    pub report: BoundReport,
    /// k-subgraph report; absent when the attacker expects at most one block.
    pub general_k: Option<BoundReport>,
    pub bitcoin_mu_c: Option<f64>,
    pub epsilon: f64,
    /// Delay reaching `1 - epsilon`; absent when rho is outside `(0, 0.5)`.
    pub min_delay: Option<f64>,
}

pub fn analyze(inputs: BoundInputs, rule: ForkRule) -> Result<Analysis, CliError> {
    inputs.validate().map_err(CliError::config)?;
    let means = expected_means(&inputs);
    let report = success_report(&inputs, rule).map_err(CliError::config)?;
    let epsilon = inputs.epsilon.unwrap_or(0.1);
    let params = AttackParams {
        rho: inputs.rho,
        k: inputs.k,
        epsilon,
        tau: None,
        delta: inputs.delta,
        variant: rule,
        pi: inputs.pi,
        start: 0.0,
    };
    Ok(Analysis {
        inputs,
        rule,
        mu_c: means.mu_c,
        mu_m: means.mu_m,
        report,
        general_k: general_k_bounds(&inputs).ok(),
        bitcoin_mu_c: if inputs.pi.is_some() { bitcoin_mean(&inputs).ok() } else { None },
        epsilon,
        min_delay: min_attack_delay(&params, inputs.t, inputs.d).ok(),
    })
}

/// Evaluates at the minimal delay reaching `1 - epsilon`; `inputs.tau` is ignored.
pub fn analyze_at_min_delay(mut inputs: BoundInputs, rule: ForkRule) -> Result<Analysis, CliError> {
    inputs.tau = 1.0;
    let probe = analyze(inputs, rule)?;
    inputs.tau =
        probe.min_delay.ok_or_else(|| CliError::Config(format!("no minimal delay exists for rho = {}", inputs.rho)))?;
    analyze(inputs, rule)
}

pub fn sweep(base: BoundInputs, axis: SweepAxis, from: f64, to: f64, step: f64) -> Result<Vec<SweepPoint>, CliError> {
    if base.k != 2 {
        return Err(CliError::Config("sweeps evaluate the two-subgraph bound; use k = 2".into()));
    }
    curve_sweep(&base, axis, from, to, step).map_err(CliError::config)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Scenario::from_json(&text).map_err(CliError::config)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug)]
pub enum Batch {
    Attack(Vec<AttackVerdict>),
    Plain(Vec<(u64, SimulationOutcome)>),
}

/// Runs every seed, in parallel, keeping rows in seed-list order.
pub fn simulate(resolved: &Resolved, seeds: &[u64]) -> Result<Batch, CliError> {
    let r = resolved;
    match &r.attack {
        Some(params) => seeds
            .par_iter()
            .map(|&seed| execute_attack(&r.graph, &r.mining, &r.cfg, params, seed).map_err(CliError::config))
            .collect::<Result<Vec<_>, _>>()
            .map(Batch::Attack),
        None => seeds
            .par_iter()
            .map(|&seed| {
                run(&r.graph, &r.mining, &r.cfg, &r.injections, r.relay, r.horizon, seed)
                    .map(|o| (seed, o))
                    .map_err(CliError::config)
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Batch::Plain),
    }
}

pub struct BatchFiles {
    pub csv: String,
    pub summary: String,
}

pub fn render_batch(name: Option<String>, batch: &Batch) -> BatchFiles {
    match batch {
        Batch::Attack(rows) => BatchFiles {
            csv: verdict_csv(rows),
            summary: serde_json::to_string_pretty(&AttackSummary::of(name, rows)).expect("summary serializes"),
        },
        Batch::Plain(rows) => BatchFiles {
            csv: outcome_csv(rows),
            summary: serde_json::to_string_pretty(&OutcomeSummary::of(name, rows)).expect("summary serializes"),
        },
    }
}

/// `dir/stem.csv` -> `dir/stem.<suffix>.json`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{suffix}.json"))
}

/// Writes the CSV, summary and metadata files of a batch; returns the summary.
pub fn write_batch(out: &Path, name: Option<String>, seeds: &[u64], batch: &Batch) -> Result<String, CliError> {
    let files = render_batch(name.clone(), batch);
    write_file(out, &files.csv)?;
    write_file(&sidecar(out, "summary"), &files.summary)?;
    let meta = serde_json::to_string_pretty(&RunMeta::now(name, seeds.to_vec())).expect("meta serializes");
    write_file(&sidecar(out, "meta"), &meta)?;
    Ok(files.summary)
}

/// Single run: JSON record and canonical DAG text.
pub fn run_once(resolved: &Resolved, seed: u64) -> Result<(String, String), CliError> {
    let r = resolved;
    match &r.attack {
        Some(params) => {
            let report =
                execute_attack_detailed(&r.graph, &r.mining, &r.cfg, params, seed).map_err(CliError::config)?;
            #[derive(Serialize)]
            struct Record<'a> {
                verdict: &'a AttackVerdict,
                plan: &'a balance_core::attack::PartitionPlan,
                attacker_moves: &'a [balance_core::attack::AttackerMove],
            }
            let record = Record { verdict: &report.verdict, plan: &report.plan, attacker_moves: &report.moves };
            Ok((serde_json::to_string_pretty(&record).expect("record serializes"), report.final_dag.to_text()))
        }
        None => {
            let outcome =
                run(&r.graph, &r.mining, &r.cfg, &r.injections, r.relay, r.horizon, seed).map_err(CliError::config)?;
            Ok((serde_json::to_string_pretty(&outcome).expect("outcome serializes"), outcome.final_dag.to_text()))
        }
    }
}
