//! Exact structure of perfect a-ary trees rooted at the fusion center.
//!
//! Levels are 1-based: level 1 holds the `a` children of the fusion
//! center and level `K` holds the `a^K` leaves.

use crate::error::{domain, Error, Result};
use crate::Rational;

/// A perfect tree `T(K, a)`: depth `K >= 2`, branching factor `a >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeShape {
    depth: u32,
    branching: u64,
    total: u128,
}

impl TreeShape {
    /// Builds `T(depth, branching)`.
    ///
    /// Fails when the node count `a(a^K - 1)/(a - 1)` does not fit an
    /// `i128`, which is the numerator type of [`Rational`].
    pub fn new(depth: u32, branching: u64) -> Result<Self> {
        if depth < 2 {
            return domain(format!("tree depth must be at least 2, got {depth}"));
        }
        if branching < 2 {
            return domain(format!("branching factor must be at least 2, got {branching}"));
        }
        let a = u128::from(branching);
        let mut population = 1u128;
        let mut total = 0u128;
        for _ in 0..depth {
            population = population.checked_mul(a).ok_or(Error::Overflow("level population"))?;
            total = total.checked_add(population).ok_or(Error::Overflow("node count"))?;
        }
        if total > i128::MAX as u128 / 2 {
            return Err(Error::Overflow("node count"));
        }
        Ok(Self { depth, branching, total })
    }

    /// `K`, the number of levels below the fusion center.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `a`, the number of children of every internal node.
    pub fn branching(&self) -> u64 {
        self.branching
    }

    /// `N`, the number of sensor nodes (the fusion center excluded).
    pub fn total_nodes(&self) -> u128 {
        self.total
    }

    /// Iterator over the valid level indices `1..=K`.
    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.depth
    }

    fn check_level(&self, k: u32) -> Result<()> {
        if k == 0 || k > self.depth {
            return domain(format!("level {k} outside 1..={}", self.depth));
        }
        Ok(())
    }

    /// `N_k = a^k`.
    pub fn level_population(&self, k: u32) -> Result<u128> {
        self.check_level(k)?;
        // Cannot overflow: a^k <= N, which was checked at construction.
        Ok(u128::from(self.branching).pow(k))
    }

    /// `beta_k = a^k / N`, the probability that a bit seen by the fusion
    /// center originated at level `k`.
    pub fn level_weight(&self, k: u32) -> Result<Rational> {
        let n_k = self.level_population(k)?;
        Ok(Rational::new(n_k as i128, self.total as i128))
    }

    /// Number of nodes covered by capturing one node at level `k`, i.e. the
    /// size of its subtree including itself. Computed by the recurrence
    /// `P_K = 1`, `P_k = a * P_{k+1} + 1`.
    pub fn profit(&self, k: u32) -> Result<u128> {
        self.check_level(k)?;
        let a = u128::from(self.branching);
        let mut p = 1u128;
        for _ in k..self.depth {
            p = a * p + 1;
        }
        Ok(p)
    }

    /// Closed form `(a^{K-k+1} - 1) / (a - 1)` of [`TreeShape::profit`].
    pub fn profit_closed_form(&self, k: u32) -> Result<u128> {
        self.check_level(k)?;
        let a = u128::from(self.branching);
        Ok((a.pow(self.depth - k + 1) - 1) / (a - 1))
    }

    /// Profits for all levels, index 0 holding level 1.
    pub fn profits(&self) -> Vec<u128> {
        let a = u128::from(self.branching);
        let mut out = vec![1u128; self.depth as usize];
        for i in (0..out.len().saturating_sub(1)).rev() {
            out[i] = a * out[i + 1] + 1;
        }
        out
    }

    /// Leaves below one node of level `k`: `a^{K-k}`.
    pub fn leaves_below(&self, k: u32) -> Result<u128> {
        self.check_level(k)?;
        Ok(u128::from(self.branching).pow(self.depth - k))
    }

    /// Cost of deploying every node of the tree: `sum_k c_k a^k`.
    pub fn deployment_cost(&self, sched: &CostSchedule) -> Result<u128> {
        if sched.len() < self.depth as usize {
            return domain(format!("cost schedule has {} levels, tree needs {}", sched.len(), self.depth));
        }
        self.levels().try_fold(0u128, |acc, k| {
            let term = u128::from(sched.cost(k)?)
                .checked_mul(self.level_population(k)?)
                .ok_or(Error::Overflow("deployment cost"))?;
            acc.checked_add(term).ok_or(Error::Overflow("deployment cost"))
        })
    }
}

impl std::fmt::Display for TreeShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T({}, {})", self.depth, self.branching)
    }
}

/// Per-level attack costs `c_1, c_2, ...`, all strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostSchedule {
    costs: Vec<u64>,
}

impl CostSchedule {
    pub fn new(costs: Vec<u64>) -> Result<Self> {
        if costs.is_empty() {
            return domain("cost schedule is empty");
        }
        if let Some(pos) = costs.iter().position(|&c| c == 0) {
            return domain(format!("cost of level {} must be positive", pos + 1));
        }
        Ok(Self { costs })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.costs
    }

    /// `c_k` for a 1-based level.
    pub fn cost(&self, k: u32) -> Result<u64> {
        match (k as usize).checked_sub(1).and_then(|i| self.costs.get(i)) {
            Some(&c) => Ok(c),
            None => domain(format!("no cost for level {k} (schedule has {})", self.costs.len())),
        }
    }

    /// Whether `c_k > c_{k+1}` for every consecutive pair in the first
    /// `levels` entries.
    pub fn is_strictly_decreasing(&self, levels: usize) -> bool {
        let n = levels.min(self.costs.len());
        self.costs[..n].windows(2).all(|w| w[0] > w[1])
    }

    /// First level `k` (1-based) with `c_k <= c_{k+1}`, if any.
    pub fn first_monotonicity_violation(&self) -> Option<u32> {
        self.costs.windows(2).position(|w| w[0] <= w[1]).map(|i| i as u32 + 1)
    }
}
