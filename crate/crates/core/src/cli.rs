//! The `servalloc` command line.
//!
//! Exit status is 0 on success, 1 for usage errors and unreadable or
//! malformed input, and 2 for domain errors such as an exhausted oracle
//! budget.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bidding::{run_protocol, BidMode, BidPolicy, RoundConfig, RunTrace};
use crate::error::{Error, Result};
use crate::experiment::{self, run_sweep, summarize, ExperimentConfig};
use crate::model::Scenario;
use crate::oracle::{self, Landscape, DEFAULT_ENUMERATION_BUDGET};
use crate::search::{global_hill_climb, outcome_to_trace, run_individual_hill_climbing};
use crate::theory::TheoryReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "servalloc", version, about = "Sensor/target service allocation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm on one scenario and write its trace.
    Simulate(SimulateArgs),
    /// Run a neighbor-count sweep from an experiment config.
    Sweep(SweepArgs),
    /// Print the exhaustive optimum and its maximizers.
    Oracle(ScenarioArgs),
    /// Print the local-optima census of a scenario.
    Census(ScenarioArgs),
    /// Print closed-form landscape predictions.
    Theory(TheoryArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Bidding,
    GlobalHc,
    IndividualHc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BidModeArg {
    Fixed,
    Marginal,
}

/// Every flag of `simulate` is one field here.
#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Sensors each target bids to.
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "bidding")]
    pub algorithm: Algorithm,
    #[arg(long, value_enum, default_value = "fixed")]
    pub bid_mode: BidModeArg,
    /// Amount carried by every fixed-mode bid.
    #[arg(long, default_value_t = 1.0)]
    pub bid_amount: f64,
    #[arg(long, default_value_t = 0.0)]
    pub miss_prob: f64,
    #[arg(long, default_value_t = 50)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = 3)]
    pub quiescence_rounds: usize,
    /// Directory for trace.csv.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl SimulateArgs {
    /// The flags that reproduce these arguments.
    pub fn to_argv(&self) -> Vec<String> {
        vec![
            "--scenario".into(),
            self.scenario.display().to_string(),
            "--k".into(),
            self.k.to_string(),
            "--seed".into(),
            self.seed.to_string(),
            "--algorithm".into(),
            value_name(&self.algorithm),
            "--bid-mode".into(),
            value_name(&self.bid_mode),
            "--bid-amount".into(),
            self.bid_amount.to_string(),
            "--miss-prob".into(),
            self.miss_prob.to_string(),
            "--max-rounds".into(),
            self.max_rounds.to_string(),
            "--quiescence-rounds".into(),
            self.quiescence_rounds.to_string(),
            "--out".into(),
            self.out.display().to_string(),
        ]
    }

    pub fn bid_policy(&self) -> BidPolicy {
        let mode = match self.bid_mode {
            BidModeArg::Fixed => BidMode::Fixed { amount: self.bid_amount },
            BidModeArg::Marginal => BidMode::Marginal,
        };
        BidPolicy {
            mode,
            neighbor_count: self.k,
        }
    }

    pub fn round_config(&self) -> RoundConfig {
        RoundConfig {
            max_rounds: self.max_rounds,
            quiescence_rounds: self.quiescence_rounds,
            miss_probability: self.miss_prob,
        }
    }
}

fn value_name<T: ValueEnum>(value: &T) -> String {
    value
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for traces.csv, summary.csv, histogram.csv and placement_alpha.csv.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Largest state space the oracle will enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct TheoryArgs {
    #[arg(long, required_unless_present = "scenario")]
    pub sensors: Option<u64>,
    /// States per sensor, counting off when it is allowed.
    #[arg(long, required_unless_present = "scenario")]
    pub states: Option<u64>,
    /// Override |A| (defaults to states^sensors).
    #[arg(long)]
    pub total_allocations: Option<f64>,
    /// Also run the oracle census on this scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Parse { .. } | Error::Io(_) | Error::Json(_) | Error::InvalidParameter(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(&args, out),
        Command::Sweep(args) => sweep(&args, out),
        Command::Oracle(args) => oracle_cmd(&args, out),
        Command::Census(args) => census_cmd(&args, out),
        Command::Theory(args) => theory_cmd(&args, out),
    }
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let start = scenario.default_start();
    let rounds = args.round_config();
    let mut trace: RunTrace = match args.algorithm {
        Algorithm::Bidding => run_protocol(&scenario, &start, &args.bid_policy(), &rounds, args.seed)?,
        Algorithm::GlobalHc => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            outcome_to_trace(&start, &global_hill_climb(&scenario, &start, &mut rng)?)
        }
        Algorithm::IndividualHc => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            run_individual_hill_climbing(&scenario, &start, &rounds, &mut rng)?
        }
    };
    let optimum = match oracle::enumerate_optimum(&scenario) {
        Ok(report) => Some(report.optimum_gu),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    if let Some(opt) = optimum {
        trace = trace.with_optimum(opt);
    }

    std::fs::create_dir_all(&args.out)?;
    let csv_path = args.out.join("trace.csv");
    experiment::write_run_trace_csv(&trace, 0, 0, args.k, File::create(&csv_path)?)?;

    let last = trace.last();
    writeln!(out, "algorithm: {:?}", args.algorithm)?;
    writeln!(out, "rounds executed: {}", trace.rounds_executed)?;
    writeln!(out, "converged: {}", trace.converged)?;
    writeln!(out, "final allocation: {}", last.allocation)?;
    writeln!(out, "final GU: {}", last.gu)?;
    match optimum {
        Some(opt) => writeln!(out, "optimum GU: {opt}")?,
        None => writeln!(out, "optimum GU: (state space over oracle budget)")?,
    }
    match last.alpha {
        Some(a) => writeln!(out, "alpha: {a}")?,
        None => writeln!(out, "alpha: undefined")?,
    }
    writeln!(out, "GU-decreasing rounds: {}", trace.gu_decrease_fraction())?;
    writeln!(out, "trace written to {}", csv_path.display())?;
    Ok(())
}

fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let config = ExperimentConfig::load(&args.config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Error::Domain(e.to_string()))?;
    let result = pool.install(|| run_sweep(&config))?;
    experiment::write_outputs(&result, &args.out)?;
    print_summary(&result, out)?;
    writeln!(out, "outputs written to {}", args.out.display())?;
    Ok(())
}

fn print_summary(result: &experiment::SweepResult, out: &mut dyn Write) -> Result<()> {
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    writeln!(
        out,
        "{:>3} {:>10} {:>12} {:>7} {:>7} {:>7} {:>11} {:>9}",
        "k", "mean_alpha", "frac_optimal", "q1", "median", "q3", "mean_rounds", "excluded"
    )?;
    for (row, stats) in summarize(result).iter().zip(&result.per_k) {
        writeln!(
            out,
            "{:>3} {:>10} {:>12} {:>7} {:>7} {:>7} {:>11} {:>9}",
            row.k,
            fmt(row.mean_alpha),
            fmt(row.frac_optimal),
            fmt(row.q1),
            fmt(row.median),
            fmt(row.q3),
            fmt(row.mean_rounds),
            stats.excluded
        )?;
    }
    Ok(())
}

fn oracle_cmd(args: &ScenarioArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let report = oracle::enumerate_optimum_with_budget(&scenario, args.budget)?;
    writeln!(out, "{} allocations enumerated", report.visited)?;
    writeln!(out, "optimum GU: {}", report.optimum_gu)?;
    writeln!(out, "maximizers ({}):", report.optimum_allocations.len())?;
    for a in &report.optimum_allocations {
        writeln!(out, "  {a}")?;
    }
    Ok(())
}

fn census_cmd(args: &ScenarioArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let census = oracle::census_with_budget(&scenario, args.budget)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&census.summary())?)?;
    Ok(())
}

fn theory_cmd(args: &TheoryArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = args.scenario.as_deref().map(Scenario::load).transpose()?;
    let sensors = args
        .sensors
        .or(scenario.as_ref().map(|s| s.num_sensors() as u64))
        .unwrap_or_default();
    let states = args
        .states
        .or(scenario.as_ref().map(|s| s.num_states() as u64))
        .unwrap_or_default();
    if states == 0 {
        return Err(Error::InvalidParameter("--states must be at least 1".into()));
    }
    let report = match args.total_allocations {
        Some(total) => TheoryReport::with_total(sensors, states, total),
        None => TheoryReport::new(sensors, states),
    };
    let json = match &scenario {
        Some(s) => {
            let census = Landscape::build(s, DEFAULT_ENUMERATION_BUDGET)?.census();
            serde_json::json!({ "theory": report, "census": census.summary() })
        }
        None => serde_json::to_value(&report)?,
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&json)?)?;
    Ok(())
}
