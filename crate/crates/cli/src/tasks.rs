//! Computations shared by the subcommands and scenario files.

use byztree::attack::{blinding_strategy, coverage_fraction, is_blinding};
use byztree::designer::{brute_force_bilevel, design_robust_tree};
use byztree::divergence::{kld, min_kld, received_distributions};
use byztree::knapsack::{classify_arrangement, solve_llp};
use byztree::sim::{simulate_fc_view, simulate_tree, Placement, SimConfig, SimMode, RNG_ALGORITHM};
use byztree::{
    Arrangement, AttackAllocation, AttackBudgetProblem, DesignOutcome, DesignScenario, Profile, Rational, Scalar,
    Strategy, TreeShape,
};

use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 0;

pub fn to_f64(t: &Rational) -> f64 {
    f64::from_rational(t)
}

/// Where the coverage fraction comes from.
#[derive(Debug, Clone)]
pub enum CoverageSource {
    Fraction(f64),
    Tree { shape: TreeShape, allocation: AttackAllocation },
}

impl CoverageSource {
    pub fn fraction(&self) -> Result<f64> {
        Ok(match self {
            CoverageSource::Fraction(t) => *t,
            CoverageSource::Tree { shape, allocation } => to_f64(&coverage_fraction(shape, allocation)?).min(1.0),
        })
    }
}

pub fn kld_table(command: &str, coverage: &CoverageSource, profile: &Profile, strat: &Strategy) -> Result<ResultTable> {
    let t = coverage.fraction()?;
    let d = received_distributions(t, profile, strat)?;
    let mut table = ResultTable::new(command, None, &["t", "p10", "p01", "pi11", "pi10", "kld"]);
    table.push_row(vec![t.into(), strat.p10.into(), strat.p01.into(), d.pi11.into(), d.pi10.into(), kld(&d).into()])?;
    Ok(table)
}

pub fn blind_table(
    command: &str,
    shape: &TreeShape,
    allocation: &AttackAllocation,
    profile: Option<&Profile>,
) -> Result<ResultTable> {
    let t = coverage_fraction(shape, allocation)?;
    let blind = is_blinding(shape, allocation)?;
    let arrangement = classify_arrangement(shape, allocation)?;
    let mut columns = vec!["K", "a", "N", "covered_nodes", "t", "blind", "implies_blind"];
    let mut row: Vec<Cell> = vec![
        shape.depth().into(),
        shape.branching().into(),
        shape.total_nodes().into(),
        covered_nodes(shape, allocation)?.into(),
        to_f64(&t).into(),
        blind.into(),
        matches!(arrangement, Arrangement::ImpliesBlind(_)).into(),
    ];
    if let Some(profile) = profile {
        columns.extend(["blinding_p10", "blinding_p01"]);
        let solution = blinding_strategy(to_f64(&t).min(1.0), profile)?;
        let (p10, p01) = solution.strategy().map_or((f64::NAN, f64::NAN), |s| (s.p10, s.p01));
        row.extend([Cell::from(p10), Cell::from(p01)]);
    }
    let mut table = ResultTable::new(command, None, &columns);
    table.set_meta("shape", shape);
    table.set_meta("allocation", format_list(allocation.counts()));
    table.set_meta("arrangement", format!("{arrangement:?}"));
    table.push_row(row)?;
    Ok(table)
}

fn covered_nodes(shape: &TreeShape, allocation: &AttackAllocation) -> Result<u128> {
    allocation.validate(shape)?;
    shape.levels().try_fold(0u128, |acc, k| Ok(acc + shape.profit(k)? * u128::from(allocation.at(k))))
}

pub fn attack_table(command: &str, problem: &AttackBudgetProblem, profile: &Profile) -> Result<ResultTable> {
    let sol = solve_llp(problem)?;
    let t = to_f64(&sol.coverage);
    let best = min_kld(t.min(1.0), profile)?;
    let levels: Vec<String> = problem.shape.levels().map(|k| format!("B_{k}")).collect();
    let mut columns: Vec<&str> = levels.iter().map(String::as_str).collect();
    columns.extend(["covered_nodes", "N", "t", "spent", "blind", "min_kld", "p10", "p01"]);
    let mut row: Vec<Cell> = sol.allocation.counts().iter().map(|&b| b.into()).collect();
    row.extend::<[Cell; 8]>([
        sol.covered_nodes.into(),
        problem.shape.total_nodes().into(),
        t.into(),
        sol.spent.into(),
        sol.blind.into(),
        best.divergence.into(),
        best.strategy.p10.into(),
        best.strategy.p01.into(),
    ]);
    let mut table = ResultTable::new(command, None, &columns);
    table.set_meta("shape", problem.shape);
    table.set_meta("costs", format_list(problem.schedule.as_slice()));
    table.set_meta("budget", problem.budget);
    table.set_meta("coverage_exact", sol.coverage);
    table.push_row(row)?;
    Ok(table)
}

/// Runs the robust design; with `k_max`, cross-checks against the
/// exhaustive bi-level search and records its pick.
pub fn design_table(command: &str, scenario: &DesignScenario, k_max: Option<u32>) -> Result<ResultTable> {
    let outcome = design_robust_tree(scenario)?;
    let mut table = ResultTable::new(command, None, &["K", "a", "N", "deployment_cost", "t", "blind"]);
    table.set_meta("costs", format_list(scenario.schedule.as_slice()));
    table.set_meta("outcome", outcome_label(&outcome));
    if let Some(k_max) = k_max {
        let report = brute_force_bilevel(scenario, k_max)?;
        table.set_meta("bilevel_outcome", outcome_label(&report.outcome));
    }
    if let DesignOutcome::Solution(shape) = outcome {
        let problem = AttackBudgetProblem::new(shape, scenario.schedule.clone(), scenario.attacker_budget)?;
        let response = solve_llp(&problem)?;
        table.push_row(vec![
            shape.depth().into(),
            shape.branching().into(),
            shape.total_nodes().into(),
            shape.deployment_cost(&scenario.schedule)?.into(),
            to_f64(&response.coverage).into(),
            response.blind.into(),
        ])?;
    }
    Ok(table)
}

pub fn outcome_label(outcome: &DesignOutcome) -> String {
    match outcome {
        DesignOutcome::Solution(shape) => shape.to_string(),
        DesignOutcome::Infeasible => "infeasible".into(),
    }
}

pub fn simulate_table(
    command: &str,
    coverage: &CoverageSource,
    profile: &Profile,
    strat: &Strategy,
    samples: u64,
    seed: u64,
) -> Result<ResultTable> {
    let (pair, t, mode) = match coverage {
        CoverageSource::Fraction(t) => {
            let cfg = SimConfig::new(samples, seed, SimMode::FcView)?;
            (simulate_fc_view(*t, profile, strat, &cfg)?, *t, "fc-view")
        }
        CoverageSource::Tree { shape, allocation } => {
            let placement = Placement::spread(shape, allocation)?;
            let cfg = SimConfig::new(samples, seed, SimMode::TreePropagation)?;
            let result = simulate_tree(shape, &placement, profile, strat, &cfg)?;
            (result.pair, to_f64(&result.coverage), "tree")
        }
    };
    let exact = received_distributions(t, profile, strat)?;
    let mut table = ResultTable::new(
        command,
        Some(seed),
        &["t", "pi11_hat", "pi10_hat", "std_err11", "std_err10", "pi11", "pi10", "kld_hat", "kld", "max_z", "trials"],
    );
    table.set_meta("mode", mode);
    table.set_meta("samples", samples);
    table.set_meta("rng", RNG_ALGORITHM);
    table.push_row(vec![
        t.into(),
        pair.pi11_hat.into(),
        pair.pi10_hat.into(),
        pair.std_err11.into(),
        pair.std_err10.into(),
        exact.pi11.into(),
        exact.pi10.into(),
        pair.kld_estimate().into(),
        kld(&exact).into(),
        pair.max_z_score(&exact).into(),
        pair.trials.into(),
    ])?;
    Ok(table)
}

pub fn format_list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}
