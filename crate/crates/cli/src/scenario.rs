//! TOML scenario files.
//!
//! ```toml
//! task = "attack"           # kld | blind | attack | design | simulate
//! costs = [52, 48, 24]
//! allocation = [1, 0, 0]    # or `coverage = 0.3`
//!
//! [shape]
//! depth = 3
//! branching = 2
//!
//! [profile]                 # Byzantine values default to the honest ones
//! pd = 0.8
//! pfa = 0.2
//!
//! [strategy]
//! p10 = 1.0
//! p01 = 1.0
//!
//! [budgets]
//! attacker = 50
//! network = 400000
//!
//! [design]
//! a_min = 3
//! a_max = 11
//! k_min = 2
//! n_min = 1400
//! k_max = 10                # optional cross-check against exhaustive search
//!
//! [sim]
//! samples = 1000000
//! seed = 7
//! ```

use std::path::Path;

use byztree::{
    AttackAllocation, AttackBudgetProblem, CostSchedule, DesignScenario, FlipStrategy, Profile, SensorProfile,
    Strategy, TreeShape,
};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::table::ResultTable;
use crate::tasks::{self, CoverageSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Kld,
    Blind,
    Attack,
    Design,
    Simulate,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Kld => "kld",
            Task::Blind => "blind",
            Task::Attack => "attack",
            Task::Design => "design",
            Task::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    pub depth: u32,
    pub branching: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub pd: f64,
    pub pfa: f64,
    pub pd_byzantine: Option<f64>,
    pub pfa_byzantine: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub p10: f64,
    pub p01: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub attacker: Option<u64>,
    pub network: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub a_min: u64,
    pub a_max: u64,
    pub k_min: u32,
    pub n_min: u64,
    pub k_max: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub task: Task,
    pub costs: Option<Vec<u64>>,
    pub allocation: Option<Vec<u64>>,
    pub coverage: Option<f64>,
    pub shape: Option<ShapeSection>,
    pub profile: Option<ProfileSection>,
    pub strategy: Option<StrategySection>,
    #[serde(default)]
    pub budgets: BudgetSection,
    pub design: Option<DesignSection>,
    #[serde(default)]
    pub sim: SimSection,
}

/// A scenario whose sections have all been checked against the model's
/// invariants.
#[derive(Debug, Clone)]
pub struct ValidatedScenario {
    pub task: Task,
    pub shape: Option<TreeShape>,
    pub allocation: Option<AttackAllocation>,
    pub coverage: Option<f64>,
    pub schedule: Option<CostSchedule>,
    pub profile: Option<Profile>,
    pub strategy: Option<Strategy>,
    pub budgets: BudgetSection,
    pub design: Option<DesignSection>,
    pub sim: SimSection,
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: origin.into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Re-validates every section present, whether or not the task uses it.
    pub fn validate(self) -> Result<ValidatedScenario> {
        let shape = self.shape.map(|s| TreeShape::new(s.depth, s.branching)).transpose()?;
        let allocation = self.allocation.map(AttackAllocation::new);
        if let (Some(shape), Some(alloc)) = (&shape, &allocation) {
            alloc.validate(shape)?;
        }
        if let Some(t) = self.coverage {
            if !(0.0..=1.0).contains(&t) {
                return Err(byztree::Error::Domain(format!("coverage = {t} outside [0, 1]")).into());
            }
        }
        let schedule = self.costs.map(CostSchedule::new).transpose()?;
        let profile = self
            .profile
            .map(|p| SensorProfile::new(p.pd, p.pfa, p.pd_byzantine.unwrap_or(p.pd), p.pfa_byzantine.unwrap_or(p.pfa)))
            .transpose()?;
        let strategy = self.strategy.map(|s| FlipStrategy::new(s.p10, s.p01)).transpose()?;
        Ok(ValidatedScenario {
            task: self.task,
            shape,
            allocation,
            coverage: self.coverage,
            schedule,
            profile,
            strategy,
            budgets: self.budgets,
            design: self.design,
            sim: self.sim,
        })
    }
}

fn missing(origin: &str, task: Task, what: &str) -> CliError {
    CliError::Parse { path: origin.into(), message: format!("task `{}` requires {what}", task.name()) }
}

impl ValidatedScenario {
    fn coverage_source(&self, origin: &str) -> Result<CoverageSource> {
        match (self.coverage, &self.shape, &self.allocation) {
            (Some(t), None, None) => Ok(CoverageSource::Fraction(t)),
            (None, Some(shape), Some(alloc)) => Ok(CoverageSource::Tree { shape: *shape, allocation: alloc.clone() }),
            _ => Err(missing(origin, self.task, "either `coverage` or both [shape] and `allocation`")),
        }
    }

    /// Runs the task. `seed` and `samples` override the [sim] section.
    pub fn run(&self, origin: &str, seed: Option<u64>, samples: Option<u64>) -> Result<ResultTable> {
        let task = self.task;
        let need = |what: &str| missing(origin, task, what);
        let command = format!("scenario {origin}");
        match task {
            Task::Kld => {
                let coverage = self.coverage_source(origin)?;
                let profile = self.profile.as_ref().ok_or_else(|| need("[profile]"))?;
                let strat = self.strategy.as_ref().ok_or_else(|| need("[strategy]"))?;
                tasks::kld_table(&command, &coverage, profile, strat)
            }
            Task::Blind => {
                let shape = self.shape.as_ref().ok_or_else(|| need("[shape]"))?;
                let alloc = self.allocation.as_ref().ok_or_else(|| need("`allocation`"))?;
                tasks::blind_table(&command, shape, alloc, self.profile.as_ref())
            }
            Task::Attack => {
                let shape = self.shape.ok_or_else(|| need("[shape]"))?;
                let schedule = self.schedule.clone().ok_or_else(|| need("`costs`"))?;
                let budget = self.budgets.attacker.ok_or_else(|| need("[budgets] attacker"))?;
                let profile = self.profile.as_ref().ok_or_else(|| need("[profile]"))?;
                tasks::attack_table(&command, &AttackBudgetProblem::new(shape, schedule, budget)?, profile)
            }
            Task::Design => {
                let schedule = self.schedule.clone().ok_or_else(|| need("`costs`"))?;
                let network = self.budgets.network.ok_or_else(|| need("[budgets] network"))?;
                let attacker = self.budgets.attacker.ok_or_else(|| need("[budgets] attacker"))?;
                let d = self.design.as_ref().ok_or_else(|| need("[design]"))?;
                let scenario = DesignScenario::new(
                    schedule,
                    u128::from(network),
                    attacker,
                    (d.a_min, d.a_max),
                    d.k_min,
                    u128::from(d.n_min),
                )?;
                tasks::design_table(&command, &scenario, d.k_max)
            }
            Task::Simulate => {
                let coverage = self.coverage_source(origin)?;
                let profile = self.profile.as_ref().ok_or_else(|| need("[profile]"))?;
                let strat = self.strategy.as_ref().ok_or_else(|| need("[strategy]"))?;
                let samples = samples.or(self.sim.samples).unwrap_or(tasks::DEFAULT_SAMPLES);
                let seed = seed.or(self.sim.seed).unwrap_or(tasks::DEFAULT_SEED);
                tasks::simulate_table(&command, &coverage, profile, strat, samples, seed)
            }
        }
    }
}

/// Loads, validates and runs a scenario file.
pub fn run_scenario(path: &Path, seed: Option<u64>, samples: Option<u64>) -> Result<ResultTable> {
    let origin = path.display().to_string();
    ScenarioFile::load(path)?.validate()?.run(&origin, seed, samples)
}
