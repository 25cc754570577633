//! The attacker's budgeted node-capture problem.
//!
//! Capturing a node at level `k` costs `c_k` and covers `P_k` nodes. With at
//! most `a^k` nodes available per level, maximizing coverage under a budget
//! is a bounded knapsack. No path-disjointness constraint is imposed;
//! [`classify_arrangement`] reports whether the optimum can be placed with
//! at most one Byzantine per root-leaf path.

use crate::attack::AttackAllocation;
use crate::error::{domain, Error, Result};
use crate::topology::{CostSchedule, TreeShape};
use crate::Rational;

/// Refusal threshold for [`brute_force_llp`].
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// Refusal threshold for the DP tables of [`solve_llp`], in cells.
pub const DP_CELL_LIMIT: u128 = 1 << 25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackBudgetProblem {
    pub shape: TreeShape,
    pub schedule: CostSchedule,
    pub budget: u64,
}

impl AttackBudgetProblem {
    pub fn new(shape: TreeShape, schedule: CostSchedule, budget: u64) -> Result<Self> {
        if schedule.len() < shape.depth() as usize {
            return domain(format!("cost schedule has {} levels, {} needs {}", schedule.len(), shape, shape.depth()));
        }
        Ok(Self { shape, schedule, budget })
    }

    fn costs(&self) -> &[u64] {
        &self.schedule.as_slice()[..self.shape.depth() as usize]
    }

    /// Per-level upper bound on useful captures: `min(a^k, budget / c_k)`.
    fn effective_caps(&self) -> Vec<u64> {
        self.shape
            .levels()
            .zip(self.costs())
            .map(|(k, &c)| {
                let pop = self.shape.level_population(k).expect("level in range");
                u64::try_from(pop).unwrap_or(u64::MAX).min(self.budget / c)
            })
            .collect()
    }

    fn solution(&self, counts: Vec<u64>) -> AttackSolution {
        let profits = self.shape.profits();
        let covered: u128 = counts.iter().zip(&profits).map(|(&b, &p)| u128::from(b) * p).sum();
        let allocation = AttackAllocation::new(counts);
        let spent = allocation.cost(self.costs());
        let coverage = Rational::new(covered as i128, self.shape.total_nodes() as i128);
        AttackSolution { blind: coverage >= Rational::new(1, 2), allocation, covered_nodes: covered, coverage, spent }
    }
}

/// The attacker's best response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackSolution {
    pub allocation: AttackAllocation,
    /// `sum_k P_k B_k`, the integer objective.
    pub covered_nodes: u128,
    /// `t = covered_nodes / N`.
    pub coverage: Rational,
    pub spent: u128,
    /// `t >= 1/2`.
    pub blind: bool,
}

/// Exact bounded-knapsack DP over the budget, multiplicities handled by
/// binary splitting. Among optimal allocations the lexicographically
/// smallest `(B_1, ..., B_K)` is returned.
pub fn solve_llp(problem: &AttackBudgetProblem) -> Result<AttackSolution> {
    let costs = problem.costs();
    let caps = problem.effective_caps();
    let profits = problem.shape.profits();
    let depth = costs.len();

    // Budget beyond the price of every useful node buys nothing.
    let full_price: u128 = caps.iter().zip(costs).map(|(&m, &c)| u128::from(m) * u128::from(c)).sum();
    let budget = u128::from(problem.budget).min(full_price);
    let cells = (budget + 1) * (depth as u128 + 1);
    if cells > DP_CELL_LIMIT {
        return Err(Error::SearchTooLarge { size: cells, limit: DP_CELL_LIMIT });
    }
    let budget = budget as usize;

    // best[k][b]: max coverage using levels k+1..=K (0-based k) with spend <= b.
    let mut best = vec![vec![0u128; budget + 1]; depth + 1];
    for k in (0..depth).rev() {
        let mut row = best[k + 1].clone();
        let cost = costs[k] as usize;
        let mut remaining = caps[k];
        let mut chunk = 1u64;
        while remaining > 0 {
            let take = chunk.min(remaining);
            remaining -= take;
            chunk <<= 1;
            let weight = cost * take as usize;
            let value = profits[k] * u128::from(take);
            for b in (weight..=budget).rev() {
                let cand = row[b - weight] + value;
                if cand > row[b] {
                    row[b] = cand;
                }
            }
        }
        best[k] = row;
    }

    let mut target = best[0][budget];
    let mut rem = budget;
    let mut counts = Vec::with_capacity(depth);
    for k in 0..depth {
        let cost = costs[k] as usize;
        let pick = (0..=caps[k])
            .take_while(|&b| b as usize * cost <= rem)
            .find(|&b| u128::from(b) * profits[k] + best[k + 1][rem - b as usize * cost] == target)
            .expect("DP table admits a reconstruction");
        target -= u128::from(pick) * profits[k];
        rem -= pick as usize * cost;
        counts.push(pick);
    }
    debug_assert_eq!(target, 0);
    Ok(problem.solution(counts))
}

/// Exhaustive enumeration of all affordable allocations, used as an oracle
/// for [`solve_llp`]. The search ranges over `0..=min(a^k, budget/c_k)` per
/// level and is refused above [`BRUTE_FORCE_LIMIT`] points.
pub fn brute_force_llp(problem: &AttackBudgetProblem) -> Result<AttackSolution> {
    let costs = problem.costs();
    let caps = problem.effective_caps();
    let profits = problem.shape.profits();
    let size = caps.iter().try_fold(1u128, |acc, &m| acc.checked_mul(u128::from(m) + 1)).unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::SearchTooLarge { size, limit: BRUTE_FORCE_LIMIT });
    }

    let budget = u128::from(problem.budget);
    let mut current = vec![0u64; caps.len()];
    let mut best_counts = current.clone();
    let mut best_value = 0u128;
    // Odometer with the last level spinning fastest: lexicographic order,
    // so the first strict improvement is the lexicographically smallest.
    loop {
        let spend: u128 = current.iter().zip(costs).map(|(&b, &c)| u128::from(b) * u128::from(c)).sum();
        if spend <= budget {
            let value: u128 = current.iter().zip(&profits).map(|(&b, &p)| u128::from(b) * p).sum();
            if value > best_value {
                best_value = value;
                best_counts.clone_from(&current);
            }
        }
        let mut i = current.len();
        loop {
            if i == 0 {
                return Ok(problem.solution(best_counts));
            }
            i -= 1;
            if current[i] < caps[i] {
                current[i] += 1;
                break;
            }
            current[i] = 0;
        }
    }
}

/// Why an allocation cannot be placed disjointly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlindCause {
    /// Every node of this level is captured.
    SaturatedLevel(u32),
    /// The subtrees of the captured nodes need more leaves than exist.
    Overlapping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrangement {
    /// The counts fit with at most one Byzantine on each root-leaf path.
    DisjointPlaceable,
    /// The counts saturate a level or must overlap; either way they cover
    /// at least half the network.
    ImpliesBlind(BlindCause),
}

/// Leaves needed to host the allocation disjointly: `sum_k B_k a^{K-k}`.
pub fn leaf_demand(shape: &TreeShape, alloc: &AttackAllocation) -> Result<u128> {
    alloc.validate(shape)?;
    shape.levels().try_fold(0u128, |acc, k| Ok(acc + u128::from(alloc.at(k)) * shape.leaves_below(k)?))
}

/// Classifies an allocation as placeable on disjoint paths or as one that
/// necessarily blinds the fusion center.
pub fn classify_arrangement(shape: &TreeShape, alloc: &AttackAllocation) -> Result<Arrangement> {
    alloc.validate(shape)?;
    for k in shape.levels() {
        if alloc.at(k) > 0 && u128::from(alloc.at(k)) == shape.level_population(k)? {
            return Ok(Arrangement::ImpliesBlind(BlindCause::SaturatedLevel(k)));
        }
    }
    let leaves = shape.level_population(shape.depth())?;
    Ok(if leaf_demand(shape, alloc)? > leaves {
        Arrangement::ImpliesBlind(BlindCause::Overlapping)
    } else {
        Arrangement::DisjointPlaceable
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ATTACK_COSTS: [u64; 9] = [52, 48, 24, 16, 12, 8, 10, 6, 4];

    fn problem(k: u32, a: u64, costs: &[u64], budget: u64) -> AttackBudgetProblem {
        AttackBudgetProblem::new(TreeShape::new(k, a).unwrap(), CostSchedule::new(costs.to_vec()).unwrap(), budget)
            .unwrap()
    }

    #[test]
    fn small_binary_tree() {
        let p = problem(2, 2, &[52, 48], 50);
        for sol in [solve_llp(&p).unwrap(), brute_force_llp(&p).unwrap()] {
            assert_eq!(sol.allocation.counts(), &[0, 1]);
            assert_eq!(sol.coverage, Rational::new(1, 6));
            assert!(!sol.blind);
        }
        // 52 + 48 fits exactly, so one node of each level is affordable.
        let p = problem(2, 2, &[52, 48], 100);
        for sol in [solve_llp(&p).unwrap(), brute_force_llp(&p).unwrap()] {
            assert_eq!(sol.allocation.counts(), &[1, 1]);
            assert_eq!(sol.coverage, Rational::new(2, 3));
            assert!(sol.blind);
            assert_eq!(sol.spent, 100);
        }
        let sol = solve_llp(&problem(2, 2, &[52, 48], 99)).unwrap();
        assert_eq!(sol.allocation.counts(), &[1, 0]);
        assert_eq!(sol.coverage, Rational::new(1, 2));
        assert!(sol.blind);
    }

    #[test]
    fn zero_budget() {
        let sol = solve_llp(&problem(3, 3, &[5, 4, 3], 0)).unwrap();
        assert_eq!(sol.allocation.counts(), &[0, 0, 0]);
        assert_eq!(sol.coverage, Rational::from_integer(0));
    }

    #[test]
    fn three_level_binary_tree() {
        // 48 + 24 > 50, so the choice is one level-2 node (covers 3) or
        // two leaves (cover 2).
        let p = problem(3, 2, &ATTACK_COSTS, 50);
        let brute = brute_force_llp(&p).unwrap();
        assert_eq!(brute.allocation.counts(), &[0, 1, 0]);
        assert_eq!(brute.coverage, Rational::new(3, 14));
        assert_eq!(solve_llp(&p).unwrap(), brute);
    }

    #[test]
    fn everything_affordable() {
        let p = problem(3, 2, &[5, 3, 1], 10_000);
        let sol = solve_llp(&p).unwrap();
        assert_eq!(sol.allocation.counts(), &[2, 4, 8]);
        assert_eq!(brute_force_llp(&p).unwrap(), sol);
    }

    #[test]
    fn brute_force_guard() {
        let p = problem(9, 3, &[1; 9], 1_000_000);
        assert!(matches!(brute_force_llp(&p), Err(Error::SearchTooLarge { .. })));
    }

    #[test]
    fn schedule_too_short() {
        let r = AttackBudgetProblem::new(TreeShape::new(3, 2).unwrap(), CostSchedule::new(vec![3, 2]).unwrap(), 5);
        assert!(r.is_err());
    }

    #[test]
    fn ties_break_lexicographically() {
        // B = [1, 0] and B = [0, 3] both spend 3 and cover 3 nodes.
        let p = problem(2, 2, &[3, 1], 3);
        let dp = solve_llp(&p).unwrap();
        assert_eq!(dp.covered_nodes, 3);
        assert_eq!(dp.allocation.counts(), &[0, 3]);
        assert_eq!(brute_force_llp(&p).unwrap(), dp);
    }

    #[test]
    fn classification_examples() {
        let t23 = TreeShape::new(2, 3).unwrap();
        assert_eq!(
            classify_arrangement(&t23, &vec![2, 4].into()).unwrap(),
            Arrangement::ImpliesBlind(BlindCause::Overlapping)
        );
        let t32 = TreeShape::new(3, 2).unwrap();
        assert_eq!(
            classify_arrangement(&t32, &vec![0, 0, 8].into()).unwrap(),
            Arrangement::ImpliesBlind(BlindCause::SaturatedLevel(3))
        );
        assert_eq!(classify_arrangement(&t32, &AttackAllocation::none(3)).unwrap(), Arrangement::DisjointPlaceable);
        assert_eq!(classify_arrangement(&t32, &vec![1, 1, 2].into()).unwrap(), Arrangement::DisjointPlaceable);
        assert_eq!(
            classify_arrangement(&t32, &vec![1, 1, 3].into()).unwrap(),
            Arrangement::ImpliesBlind(BlindCause::Overlapping)
        );
    }
}
