// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use balance_cli::commands::{self, Batch};
use balance_cli::presets;
use balance_cli::report::sweep_csv;
use balance_cli::scenario::Scenario;
use balance_cli::units::{parse_quantity, Dimension};
use balance_cli::CliError;
use balance_core::analysis::{BoundInputs, SweepAxis};
use balance_core::consensus::ForkRule;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "balance", version, about = "Balance attack bounds and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate means, bounds and the minimal delay.
    Analyze(AnalyzeArgs),
    /// Tabulate the two-subgraph bound along one axis as CSV.
    Sweep(SweepArgs),
    /// Run a batch of seeds of a scenario.
    Simulate(SimulateArgs),
    /// Run one seed of a scenario and print its record.
    Run(RunArgs),
    /// Print a built-in scenario as JSON.
    Preset { name: String },
}

#[derive(Args)]
struct BoundArgs {
    /// Built-in scenario supplying t, d and rho; explicit flags override it.
    #[arg(long)]
    preset: Option<String>,
    /// Attacker share of the mining power.
    #[arg(long)]
    rho: Option<String>,
    /// Total mining power, e.g. "20 MH/s".
    #[arg(long)]
    t: Option<String>,
    /// Difficulty, e.g. "30 MH".
    #[arg(long)]
    d: Option<String>,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
}

impl BoundArgs {
    fn inputs(&self, tau: f64) -> Result<BoundInputs, CliError> {
        let base = match &self.preset {
            Some(name) => {
                let scenario = presets::preset(name).ok_or_else(|| unknown_preset(name))?;
                let resolved = scenario.resolve().map_err(CliError::config)?;
                let rho = resolved.attack.as_ref().map(|a| a.rho);
                Some((resolved.graph.total_power(), resolved.mining.difficulty, rho))
            }
            None => None,
        };
        let q = |flag: &Option<String>, dim, fallback: Option<f64>, name: &str| match flag {
            Some(s) => parse_quantity(s, dim).map_err(CliError::config),
            None => fallback.ok_or_else(|| CliError::Config(format!("missing --{name} (or --preset)"))),
        };
        Ok(BoundInputs {
            t: q(&self.t, Dimension::HashRate, base.map(|b| b.0), "t")?,
            d: q(&self.d, Dimension::Hashes, base.map(|b| b.1), "d")?,
            rho: q(&self.rho, Dimension::Scalar, base.and_then(|b| b.2), "rho")?,
            k: self.k,
            tau,
            epsilon: self.epsilon,
            delta: self.delta,
            pi: self.pi,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Ghost,
    Nakamoto,
}

impl From<Rule> for ForkRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Ghost => ForkRule::Ghost,
            Rule::Nakamoto => ForkRule::Nakamoto,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    bound: BoundArgs,
    /// Delay, e.g. "1180 s" or "19 min"; defaults to the minimal delay for epsilon.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long, alias = "variant", value_enum, default_value = "ghost")]
    rule: Rule,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Tau,
    Rho,
    D,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    bound: BoundArgs,
    #[arg(long, value_enum)]
    axis: Axis,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    #[arg(long)]
    step: String,
    /// Fixed delay when sweeping another axis.
    #[arg(long, default_value = "0")]
    tau: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, alias = "config", conflicts_with = "preset", required_unless_present = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Base seed; overrides the scenario seed.
    #[arg(long, env = "BAL_SEED")]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario, CliError> {
        match (&self.scenario, &self.preset) {
            (Some(path), _) => commands::load_scenario(path),
            (None, Some(name)) => presets::preset(name).ok_or_else(|| unknown_preset(name)),
            (None, None) => Err(CliError::Config("give --scenario or --preset".into())),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Number of consecutive seeds; defaults to the scenario's run section.
    #[arg(long)]
    seeds: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// CSV destination; summary and metadata land next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Record destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the final DAG snapshot here.
    #[arg(long)]
    dag: Option<PathBuf>,
}

fn unknown_preset(name: &str) -> CliError {
    CliError::Config(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => commands::write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>".as_ref(), e))
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze(a) => {
            let analysis = match &a.tau {
                Some(tau) => {
                    let tau = parse_quantity(tau, Dimension::Seconds).map_err(CliError::config)?;
                    commands::analyze(a.bound.inputs(tau)?, a.rule.into())?
                }
                None => commands::analyze_at_min_delay(a.bound.inputs(0.0)?, a.rule.into())?,
            };
            emit(None, &(serde_json::to_string_pretty(&analysis).expect("analysis serializes") + "\n"))
        }
        Command::Sweep(s) => {
            let (axis, dim) = match s.axis {
                Axis::Tau => (SweepAxis::Tau, Dimension::Seconds),
                Axis::Rho => (SweepAxis::Rho, Dimension::Scalar),
                Axis::D => (SweepAxis::D, Dimension::Hashes),
            };
            let q = |v: &str| parse_quantity(v, dim).map_err(CliError::config);
            let tau = parse_quantity(&s.tau, Dimension::Seconds).map_err(CliError::config)?;
            let points = commands::sweep(s.bound.inputs(tau)?, axis, q(&s.from)?, q(&s.to)?, q(&s.step)?)?;
            emit(s.out.as_ref(), &sweep_csv(&points))
        }
        Command::Simulate(s) => {
            let scenario = s.scenario.load()?;
            let resolved = scenario.resolve().map_err(CliError::config)?;
            let base = s.scenario.seed.unwrap_or(resolved.seed);
            // A new base seed shifts the whole batch, so an explicit list only counts.
            let listed = resolved.run.seeds.as_ref().map(|l| l.len() as u64);
            let count = s.seeds.or_else(|| s.scenario.seed.and(listed.or(resolved.run.seed_count)));
            let seeds = resolved.batch_seeds(base, count);
            let batch = match s.threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(CliError::config)?
                    .install(|| commands::simulate(&resolved, &seeds))?,
                None => commands::simulate(&resolved, &seeds)?,
            };
            let out = s.out.or_else(|| resolved.run.out.clone());
            match out {
                Some(path) => {
                    let summary = commands::write_batch(&path, scenario.name.clone(), &seeds, &batch)?;
                    emit(None, &(summary + "\n"))
                }
                None => {
                    let files = commands::render_batch(scenario.name.clone(), &batch);
                    eprintln!("{}", files.summary);
                    emit(None, &files.csv)
                }
            }
            .map(|_| {
                if let Batch::Attack(rows) = &batch {
                    let wins = rows.iter().filter(|v| v.success).count();
                    eprintln!("{wins} of {} runs succeeded", rows.len());
                }
            })
        }
        Command::Run(r) => {
            let scenario = r.scenario.load()?;
            let resolved = scenario.resolve().map_err(CliError::config)?;
            let seed = r.scenario.seed.unwrap_or(resolved.seed);
            let (record, dag) = commands::run_once(&resolved, seed)?;
            if let Some(path) = &r.dag {
                commands::write_file(path, &dag)?;
            }
            emit(r.out.as_ref(), &(record + "\n"))
        }
        Command::Preset { name } => {
            let scenario = presets::preset(&name).ok_or_else(|| unknown_preset(&name))?;
            emit(None, &(scenario.to_json() + "\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
