//! The network designer's side: choosing `(K, a)` so that the attacker's
//! best response covers as little of the network as possible.

use std::cmp::Reverse;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::knapsack::{solve_llp, AttackBudgetProblem, AttackSolution};
use crate::topology::{CostSchedule, TreeShape};

/// Budgets and bounds of the topology design problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignScenario {
    pub schedule: CostSchedule,
    pub network_budget: u128,
    pub attacker_budget: u64,
    pub a_min: u64,
    pub a_max: u64,
    pub k_min: u32,
    pub n_min: u128,
}

impl DesignScenario {
    pub fn new(
        schedule: CostSchedule,
        network_budget: u128,
        attacker_budget: u64,
        (a_min, a_max): (u64, u64),
        k_min: u32,
        n_min: u128,
    ) -> Result<Self> {
        if a_min < 2 {
            return domain(format!("a_min must be at least 2, got {a_min}"));
        }
        if a_min > a_max {
            return domain(format!("a_min = {a_min} exceeds a_max = {a_max}"));
        }
        if k_min < 2 {
            return domain(format!("K_min must be at least 2, got {k_min}"));
        }
        if n_min < 1 {
            return domain("N_min must be at least 1");
        }
        Ok(Self { schedule, network_budget, attacker_budget, a_min, a_max, k_min, n_min })
    }

    /// Deployment cost of `T(depth, a)`, or `None` if it does not fit in
    /// exact arithmetic (and therefore exceeds any budget).
    fn cost_of(&self, depth: u32, a: u64) -> Result<Option<u128>> {
        if depth as usize > self.schedule.len() {
            return Err(Error::Config(format!(
                "cost schedule has {} levels but the search reached K = {depth}",
                self.schedule.len()
            )));
        }
        match TreeShape::new(depth, a) {
            Ok(shape) => match shape.deployment_cost(&self.schedule) {
                Ok(c) => Ok(Some(c)),
                Err(Error::Overflow(_)) => Ok(None),
                Err(e) => Err(e),
            },
            Err(Error::Overflow(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn affordable(&self, depth: u32, a: u64) -> Result<bool> {
        Ok(self.cost_of(depth, a)?.is_some_and(|c| c <= self.network_budget))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignOutcome {
    Solution(TreeShape),
    Infeasible,
}

impl DesignOutcome {
    pub fn shape(&self) -> Option<TreeShape> {
        match self {
            Self::Solution(s) => Some(*s),
            Self::Infeasible => None,
        }
    }
}

/// Robust perfect a-ary tree design.
///
/// Starts from `(K_min, a_max)`. Whenever the tree is over budget, `a` drops
/// to the largest affordable value; if that falls below `a_min` there is no
/// solution. Otherwise the first candidate with enough nodes is returned and
/// `K` grows until then. The attacker's problem is never solved here: the
/// smallest `K` with the largest `a` is optimal because coverage does not
/// decrease with `K` and decreases with `a`.
pub fn design_robust_tree(scenario: &DesignScenario) -> Result<DesignOutcome> {
    if let Some(k) = scenario.schedule.first_monotonicity_violation() {
        log::warn!(
            "cost schedule is not strictly decreasing (c_{k} <= c_{}); the design guarantee assumes it is",
            k + 1
        );
    }
    let mut depth = scenario.k_min;
    let mut a = scenario.a_max;
    loop {
        if !scenario.affordable(depth, a)? {
            let mut lowered = None;
            for cand in (scenario.a_min..a).rev() {
                if scenario.affordable(depth, cand)? {
                    lowered = Some(cand);
                    break;
                }
            }
            match lowered {
                Some(cand) => a = cand,
                None => return Ok(DesignOutcome::Infeasible),
            }
        }
        let shape = TreeShape::new(depth, a)?;
        if shape.total_nodes() >= scenario.n_min {
            return Ok(DesignOutcome::Solution(shape));
        }
        depth += 1;
    }
}

/// One `(K, a)` cell of the exhaustive bi-level search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRow {
    pub depth: u32,
    pub branching: u64,
    pub nodes: Option<u128>,
    pub deployment_cost: Option<u128>,
    pub feasible: bool,
    /// The attacker's best response; `None` when the tree is too large for
    /// the solver (only possible for infeasible cells).
    pub response: Option<AttackSolution>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiLevelReport {
    pub outcome: DesignOutcome,
    pub table: Vec<CandidateRow>,
}

/// Solves the bi-level program by enumerating every `(K, a)` in
/// `[K_min, k_max] x [a_min, a_max]` and the attacker's best response on each.
///
/// The feasible shape with the smallest best-response coverage wins; ties go
/// to the smaller `K`, then the larger `a`. Rows are ordered by `K`, then `a`.
pub fn brute_force_bilevel(scenario: &DesignScenario, k_max: u32) -> Result<BiLevelReport> {
    if k_max as usize > scenario.schedule.len() {
        return Err(Error::Config(format!(
            "k_max = {k_max} exceeds the {} levels of the cost schedule",
            scenario.schedule.len()
        )));
    }
    let cells: Vec<(u32, u64)> =
        (scenario.k_min..=k_max).flat_map(|k| (scenario.a_min..=scenario.a_max).map(move |a| (k, a))).collect();
    let table =
        cells.into_par_iter().map(|(depth, a)| evaluate_cell(scenario, depth, a)).collect::<Result<Vec<_>>>()?;

    let outcome = table
        .iter()
        .filter(|row| row.feasible)
        .min_by_key(|row| {
            let t = row.response.as_ref().expect("feasible rows carry a response").coverage;
            (t, row.depth, Reverse(row.branching))
        })
        .map_or(DesignOutcome::Infeasible, |row| {
            DesignOutcome::Solution(TreeShape::new(row.depth, row.branching).expect("row shape is valid"))
        });
    Ok(BiLevelReport { outcome, table })
}

fn evaluate_cell(scenario: &DesignScenario, depth: u32, a: u64) -> Result<CandidateRow> {
    let shape = match TreeShape::new(depth, a) {
        Ok(s) => s,
        Err(Error::Overflow(_)) => {
            return Ok(CandidateRow {
                depth,
                branching: a,
                nodes: None,
                deployment_cost: None,
                feasible: false,
                response: None,
            })
        }
        Err(e) => return Err(e),
    };
    let deployment_cost = scenario.cost_of(depth, a)?;
    let feasible =
        deployment_cost.is_some_and(|c| c <= scenario.network_budget) && shape.total_nodes() >= scenario.n_min;
    let problem = AttackBudgetProblem::new(shape, scenario.schedule.clone(), scenario.attacker_budget)?;
    let response = match solve_llp(&problem) {
        Ok(sol) => Some(sol),
        Err(e) if feasible => return Err(e),
        Err(_) => None,
    };
    Ok(CandidateRow { depth, branching: a, nodes: Some(shape.total_nodes()), deployment_cost, feasible, response })
}

/// Smallest branching factor in `[2, a_max]` at which the attacker's best
/// response on `T(depth, a)` stays below half coverage.
pub fn compute_a_min(depth: u32, schedule: &CostSchedule, attacker_budget: u64, a_max: u64) -> Result<Option<u64>> {
    for a in 2..=a_max {
        let shape = TreeShape::new(depth, a)?;
        let problem = AttackBudgetProblem::new(shape, schedule.clone(), attacker_budget)?;
        if !solve_llp(&problem)?.blind {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// The two integer inequalities behind coverage decreasing in `a`, for
/// level `k` of a depth-`depth` tree:
///
/// * `a[(a+1)^{K-k+1} - 1] - (a+1)[a^{K-k+1} - 1] > 0`
/// * `(a+1)^{K+1}[a^{K-k+1} - 1] - a^{K+1}[(a+1)^{K-k+1} - 1] >= 0`
///
/// Evaluated exactly with big integers.
pub fn branching_inequalities(a: u64, depth: u32, k: u32) -> (bool, bool) {
    assert!(a >= 2 && (1..=depth).contains(&k), "need a >= 2 and 1 <= k <= K");
    let a0 = BigInt::from(a);
    let a1 = BigInt::from(a + 1);
    let one = BigInt::from(1);
    let span = depth - k + 1;
    let first = &a0 * (a1.pow(span) - &one) - &a1 * (a0.pow(span) - &one);
    let second = a1.pow(depth + 1) * (a0.pow(span) - &one) - a0.pow(depth + 1) * (a1.pow(span) - &one);
    let zero = BigInt::from(0);
    (first > zero, second >= zero)
}
