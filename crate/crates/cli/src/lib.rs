//! Command-line front end and experiment harness for `byztree`.

pub mod error;
pub mod figures;
pub mod scenario;
pub mod table;
pub mod tasks;

use std::path::PathBuf;

use byztree::{
    AttackAllocation, AttackBudgetProblem, CostSchedule, DesignScenario, FlipStrategy, SensorProfile, TreeShape,
};
use clap::{Parser, Subcommand};

pub use error::{CliError, Result};
pub use figures::{run_figure, FigureId, Overrides};
pub use scenario::run_scenario;
pub use table::{Cell, ResultTable};

use tasks::CoverageSource;

#[derive(Debug, Parser)]
#[command(name = "byztree", version, about = "Byzantine attacks and robust design for tree detection networks")]
pub struct Cli {
    /// Seed for stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the table to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the grid behind one of the reference plots.
    Figure {
        id: FigureId,
        /// Override a default parameter.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a TOML scenario file.
    Scenario { path: PathBuf },
    /// Attacker's best response on T(K, a) under a budget.
    Attack {
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        branching: u64,
        /// Per-level capture costs, root side first.
        #[arg(long, value_delimiter = ',', required = true)]
        costs: Vec<u64>,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value_t = figures::PD)]
        pd: f64,
        #[arg(long, default_value_t = figures::PFA)]
        pfa: f64,
    },
    /// Robust (K, a) selection.
    Design {
        #[arg(long, value_delimiter = ',', required = true)]
        costs: Vec<u64>,
        #[arg(long)]
        network_budget: u128,
        #[arg(long)]
        attacker_budget: u64,
        #[arg(long, default_value_t = 2)]
        a_min: u64,
        #[arg(long)]
        a_max: u64,
        #[arg(long, default_value_t = 2)]
        k_min: u32,
        #[arg(long, default_value_t = 1)]
        n_min: u128,
        /// Also run the exhaustive bi-level search up to this depth.
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// Monte Carlo estimate of the received bit distributions.
    Simulate {
        /// Coverage fraction for the fusion-center view.
        #[arg(long, conflicts_with_all = ["depth", "branching", "allocation"])]
        coverage: Option<f64>,
        /// Tree depth for full propagation.
        #[arg(long, requires_all = ["branching", "allocation"])]
        depth: Option<u32>,
        #[arg(long)]
        branching: Option<u64>,
        /// Byzantines per level.
        #[arg(long, value_delimiter = ',')]
        allocation: Vec<u64>,
        #[arg(long, default_value_t = figures::PD)]
        pd: f64,
        #[arg(long, default_value_t = figures::PFA)]
        pfa: f64,
        #[arg(long)]
        pd_byzantine: Option<f64>,
        #[arg(long)]
        pfa_byzantine: Option<f64>,
        #[arg(long)]
        p10: f64,
        #[arg(long)]
        p01: f64,
    },
}

/// Runs a parsed command line and returns the table to emit.
pub fn execute(cli: &Cli) -> Result<ResultTable> {
    match &cli.command {
        Command::Figure { id, set } => {
            if cli.seed.is_some() || cli.samples.is_some() {
                log::warn!("figures are deterministic; --seed and --samples are ignored");
            }
            run_figure(*id, &Overrides::parse(set)?)
        }
        Command::Scenario { path } => run_scenario(path, cli.seed, cli.samples),
        Command::Attack { depth, branching, costs, budget, pd, pfa } => {
            let problem = AttackBudgetProblem::new(
                TreeShape::new(*depth, *branching)?,
                CostSchedule::new(costs.clone())?,
                *budget,
            )?;
            tasks::attack_table("attack", &problem, &SensorProfile::identical(*pd, *pfa)?)
        }
        Command::Design { costs, network_budget, attacker_budget, a_min, a_max, k_min, n_min, k_max } => {
            let scenario = DesignScenario::new(
                CostSchedule::new(costs.clone())?,
                *network_budget,
                *attacker_budget,
                (*a_min, *a_max),
                *k_min,
                *n_min,
            )?;
            tasks::design_table("design", &scenario, *k_max)
        }
        Command::Simulate {
            coverage,
            depth,
            branching,
            allocation,
            pd,
            pfa,
            pd_byzantine,
            pfa_byzantine,
            p10,
            p01,
        } => {
            let source = match (coverage, depth, branching) {
                (Some(t), None, None) => CoverageSource::Fraction(*t),
                (None, Some(k), Some(a)) => CoverageSource::Tree {
                    shape: TreeShape::new(*k, *a)?,
                    allocation: AttackAllocation::new(allocation.clone()),
                },
                _ => {
                    return Err(CliError::Usage("simulate needs --coverage or --depth/--branching/--allocation".into()))
                }
            };
            let profile = SensorProfile::new(*pd, *pfa, pd_byzantine.unwrap_or(*pd), pfa_byzantine.unwrap_or(*pfa))?;
            tasks::simulate_table(
                "simulate",
                &source,
                &profile,
                &FlipStrategy::new(*p10, *p01)?,
                cli.samples.unwrap_or(tasks::DEFAULT_SAMPLES),
                cli.seed.unwrap_or(tasks::DEFAULT_SEED),
            )
        }
    }
}

/// Parses `args` (program name first) and runs them.
pub fn execute_args<I, T>(args: I) -> Result<ResultTable>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli)
}
