// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use balance_cli::commands::{analyze, simulate, sweep, Batch};
use balance_cli::presets::preset;
use balance_core::analysis::{
    exact_delta_tail, general_k_bounds, general_min_delay, ghost_success_bound, BoundInputs, SweepAxis,
};
use balance_core::attack::TARGET_CLASS;
use balance_core::chain::{Block, BlockDag, BlockId, NodeId, TxId};
use balance_core::consensus::{main_branch, ConsensusConfig, ForkRule};
use balance_core::SimTime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Check);

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn testbed(tau: f64) -> BoundInputs {
    BoundInputs::new(20e6, 30e6, 0.12, 2, tau)
}

// Expected values come from a 40-digit independent evaluation.
fn formula_fidelity() -> Check {
    let a = analyze(testbed(1180.0), ForkRule::Ghost).expect("valid inputs");
    let min_delay = a.min_delay.unwrap_or(f64::NAN);
    let pass = (a.mu_c - 346.133_333).abs() <= 0.01
        && (a.mu_m - 94.40).abs() <= 0.01
        && (min_delay - 507.220_925).abs() <= 0.1
        && a.mu_m.floor() == 94.0;
    check(pass, format!("mu_c={:.4} mu_m={:.4} min_delay={:.4}s", a.mu_c, a.mu_m, min_delay))
}

fn bound_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut evaluated, mut drawn, mut violations) = (0, 0, 0);
    while evaluated < 200 {
        drawn += 1;
        let n: u64 = rng.random_range(1..=200);
        let p: f64 = rng.random_range(0.0..=0.1);
        let delta: f64 = rng.random_range(0.05..0.95);
        let mu = n as f64 * p;
        let bound = 1.0 - 4.0 * (-delta * delta * mu / 3.0).exp();
        if bound < 0.0 {
            continue;
        }
        evaluated += 1;
        let exact = exact_delta_tail(n, p, (2.0 * delta * mu).ceil() as u64).expect("n within range");
        if exact < bound {
            violations += 1;
        }
    }
    check(violations == 0, format!("{evaluated} non-vacuous tuples of {drawn} drawn, {violations} violations"))
}

fn attack_batch(name: &str, seeds: u64) -> Vec<balance_core::attack::AttackVerdict> {
    let scenario = preset(name).expect("preset exists");
    let resolved = scenario.resolve().expect("preset resolves");
    let seeds: Vec<u64> = (0..seeds).collect();
    match simulate(&resolved, &seeds).expect("batch runs") {
        Batch::Attack(rows) => rows,
        Batch::Plain(_) => unreachable!("preset has an attack section"),
    }
}

fn desk_guarantee() -> Check {
    let rows = attack_batch("ethereum-default", 1000);
    let beats = rows.iter().filter(|v| v.attacker_blocks > v.delta_observed).count();
    let freq = beats as f64 / rows.len() as f64;
    let mean_attacker = rows.iter().map(|v| v.attacker_blocks as f64).sum::<f64>() / rows.len() as f64;
    check(
        freq >= 0.87,
        format!(
            "attacker_blocks > delta in {beats}/{} seeds ({freq:.3}); tau={:.2}s, mean attacker blocks {mean_attacker:.1}",
            rows.len(),
            rows[0].tau
        ),
    )
}

fn obliviousness_end_to_end() -> Check {
    let rows = attack_batch("emulab", 200);
    let wins: Vec<_> = rows.iter().filter(|v| v.winning_class == Some(TARGET_CLASS)).collect();
    let broken = wins
        .iter()
        .filter(|v| !(v.committed_before && v.committed_then_reverted) || v.uncle_counts.attacker != 0)
        .count();
    let freq = wins.len() as f64 / rows.len() as f64;
    check(
        broken == 0 && freq > 0.5,
        format!(
            "attacker side won {}/{} ({freq:.3}); {broken} wins without revert or with attacker uncles",
            wins.len(),
            rows.len()
        ),
    )
}

fn fork_choice_divergence() -> Check {
    let edges = [
        (1, 0),
        (2, 0),
        (3, 1),
        (4, 2),
        (5, 2),
        (6, 3),
        (7, 4),
        (8, 5),
        (9, 6),
        (10, 5),
        (11, 9),
        (12, 5),
        (13, 8),
        (14, 11),
    ];
    let mut dag = BlockDag::new(BlockId(0));
    for (id, parent) in edges {
        let parent = dag.get(BlockId(parent)).expect("parents first").clone();
        dag.insert(Block::child_of(&parent, BlockId(id), NodeId(1), SimTime::from_nanos(id))).expect("valid");
    }
    let nakamoto = main_branch(&dag, &ConsensusConfig::nakamoto()).tip();
    let ghost = main_branch(&dag, &ConsensusConfig::ghost()).tip();
    check(nakamoto == BlockId(14) && ghost == BlockId(13), format!("nakamoto tip {nakamoto}, ghost tip {ghost}"))
}

fn random_view(universe: &[Block], rng: &mut ChaCha8Rng) -> BlockDag {
    let mut picked: Vec<&Block> = universe[1..].iter().filter(|_| rng.random_bool(0.5)).collect();
    for i in (1..picked.len()).rev() {
        picked.swap(i, rng.random_range(0..=i));
    }
    let mut dag = BlockDag::new(BlockId(0));
    for b in picked {
        dag.insert(b.clone()).expect("consistent universe");
    }
    dag
}

fn dag_algebra() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    for _ in 0..1000 {
        let size = rng.random_range(1..40u64);
        let mut universe = vec![Block::genesis(BlockId(0))];
        for id in 1..=size {
            let parent = universe[rng.random_range(0..universe.len())].clone();
            let b = Block::child_of(&parent, BlockId(id), NodeId(rng.random_range(0..4)), SimTime::from_nanos(id))
                .with_txs(vec![TxId(id % 3)]);
            universe.push(b);
        }
        let (a, b, c) =
            (random_view(&universe, &mut rng), random_view(&universe, &mut rng), random_view(&universe, &mut rng));
        let text = |d: &BlockDag| (d.to_text(), d.orphans().map(|o| o.id).collect::<Vec<_>>());
        let ok = text(&a.merge(&a).unwrap()) == text(&a)
            && text(&a.merge(&b).unwrap()) == text(&b.merge(&a).unwrap())
            && text(&a.merge(&b).unwrap().merge(&c).unwrap()) == text(&a.merge(&b.merge(&c).unwrap()).unwrap());
        failures += usize::from(!ok);
    }
    check(failures == 0, format!("1000 triples, {failures} law violations"))
}

fn general_k_consistency() -> Check {
    let mut worst: f64 = 0.0;
    for (rho, tau) in [(0.05, 3000.0), (0.12, 1180.0), (0.2, 600.0), (0.3, 100.0), (0.12, 0.0)] {
        let mut inputs = testbed(tau);
        inputs.rho = rho;
        inputs.delta = Some(2.0 * rho / (1.0 - rho));
        let general = general_k_bounds(&inputs).expect("delta supplied").delta_bound;
        let ghost = ghost_success_bound(&inputs).expect("k = 2");
        worst = worst.max((general - ghost).abs() / ghost.abs());
    }
    let taus: Vec<f64> =
        [2, 3, 4, 8].iter().map(|&k| general_min_delay(k, 0.12, 20e6, 30e6, 0.1, Some(0.2)).expect("valid")).collect();
    let monotone = taus.windows(2).all(|w| w[0] < w[1]);
    check(
        worst <= 1e-12 && monotone,
        format!(
            "max relative gap {worst:.1e}; tau(k=2,3,4,8) = {:.1}, {:.1}, {:.1}, {:.1} s",
            taus[0], taus[1], taus[2], taus[3]
        ),
    )
}

fn curve_ordering() -> Check {
    let series = |rho: f64, d: f64| {
        sweep(BoundInputs::new(20e6, d, rho, 2, 0.0), SweepAxis::Tau, 0.0, 3600.0, 10.0).expect("valid sweep")
    };
    let (low, high, easy) = (series(0.12, 30e6), series(0.20, 30e6), series(0.12, 15e6));
    let dominance = low.iter().zip(&high).zip(&easy).all(|((l, h), e)| h.bound >= l.bound && e.bound >= l.bound);
    let first_at =
        |s: &[balance_core::analysis::SweepPoint], level: f64| s.iter().find(|p| p.bound >= level).map(|p| p.x);
    let mut earlier = true;
    let mut report = Vec::new();
    for level in [0.5, 0.9, 0.99] {
        let (l, h) = (first_at(&low, level), first_at(&high, level));
        earlier &= matches!((l, h), (Some(l), Some(h)) if h < l);
        let show = |x: Option<f64>| x.map_or("never".to_owned(), |x| format!("{x}s"));
        report.push(format!("{level}: {} vs {}", show(h), show(l)));
    }
    check(
        dominance && earlier,
        format!("pointwise dominance {dominance}; first tau reaching level, rho 0.20 vs 0.12: {}", report.join(", ")),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("formula fidelity", formula_fidelity),
        ("bound soundness", bound_soundness),
        ("desk-scale epsilon guarantee", desk_guarantee),
        ("block obliviousness end to end", obliviousness_end_to_end),
        ("fork-choice divergence", fork_choice_divergence),
        ("DAG merge algebra", dag_algebra),
        ("general-k consistency", general_k_consistency),
        ("curve ordering", curve_ordering),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = run();
        let status = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("{status} [{}] {name}: {} ({:.1}s)", i + 1, result.detail, started.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
