//! Byzantine placement accounting and the blinding condition.

use crate::error::{domain, Result};
use crate::scalar::{is_probability, Scalar};
use crate::topology::TreeShape;
use crate::Rational;

/// Number of Byzantines at each level, `counts[k-1] = B_k`.
///
/// Counts may describe overlapping placements (two Byzantines on one
/// root-leaf path); see [`crate::knapsack::classify_arrangement`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AttackAllocation {
    counts: Vec<u64>,
}

impl AttackAllocation {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    /// The empty attack on a tree of the given depth.
    pub fn none(depth: u32) -> Self {
        Self { counts: vec![0; depth as usize] }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `B_k` for a 1-based level.
    pub fn at(&self, k: u32) -> u64 {
        self.counts[k as usize - 1]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Checks the length against `K` and `B_k <= a^k` on every level.
    pub fn validate(&self, shape: &TreeShape) -> Result<()> {
        if self.counts.len() != shape.depth() as usize {
            return domain(format!("allocation has {} levels, {} has {}", self.counts.len(), shape, shape.depth()));
        }
        for k in shape.levels() {
            let cap = shape.level_population(k)?;
            if u128::from(self.at(k)) > cap {
                return domain(format!("level {k} holds {cap} nodes, allocation asks for {}", self.at(k)));
            }
        }
        Ok(())
    }

    /// `sum_k c_k B_k` over the allocation's levels.
    pub fn cost(&self, costs: &[u64]) -> u128 {
        self.counts.iter().zip(costs).map(|(&b, &c)| u128::from(b) * u128::from(c)).sum()
    }
}

impl From<Vec<u64>> for AttackAllocation {
    fn from(counts: Vec<u64>) -> Self {
        Self::new(counts)
    }
}

/// Detection and false-alarm probabilities of honest and Byzantine sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorProfile<S> {
    pub pd_honest: S,
    pub pfa_honest: S,
    pub pd_byzantine: S,
    pub pfa_byzantine: S,
}

impl<S: Scalar> SensorProfile<S> {
    pub fn new(pd_honest: S, pfa_honest: S, pd_byzantine: S, pfa_byzantine: S) -> Result<Self> {
        for (name, v) in [
            ("pd_honest", &pd_honest),
            ("pfa_honest", &pfa_honest),
            ("pd_byzantine", &pd_byzantine),
            ("pfa_byzantine", &pfa_byzantine),
        ] {
            if !is_probability(v) {
                return domain(format!("{name} = {v:?} is not a probability"));
            }
        }
        if pd_honest <= pfa_honest {
            return domain("honest sensors must satisfy pd > pfa");
        }
        if pd_byzantine <= pfa_byzantine {
            return domain("Byzantine sensors must satisfy pd > pfa");
        }
        Ok(Self { pd_honest, pfa_honest, pd_byzantine, pfa_byzantine })
    }

    /// Honest and Byzantine sensors with the same operating point.
    pub fn identical(pd: S, pfa: S) -> Result<Self> {
        Self::new(pd.clone(), pfa.clone(), pd, pfa)
    }

    pub fn is_identical(&self) -> bool {
        self.pd_honest == self.pd_byzantine && self.pfa_honest == self.pfa_byzantine
    }
}

/// Byzantine flipping probabilities.
///
/// `p10` is the probability of sending 1 when the received or own bit is 0,
/// `p01` the probability of sending 0 when it is 1. Honest nodes use (0, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct FlipStrategy<S> {
    pub p10: S,
    pub p01: S,
}

impl<S: Scalar> FlipStrategy<S> {
    pub fn new(p10: S, p01: S) -> Result<Self> {
        if !is_probability(&p10) || !is_probability(&p01) {
            return domain(format!("flip probabilities ({p10:?}, {p01:?}) must lie in [0, 1]"));
        }
        Ok(Self { p10, p01 })
    }

    pub fn honest() -> Self {
        Self { p10: S::zero(), p01: S::zero() }
    }

    /// Flip every bit: `(p10, p01) = (1, 1)`.
    pub fn full_inversion() -> Self {
        Self { p10: S::one(), p01: S::one() }
    }

    /// Probability of sending 1 after receiving 1.
    pub fn keep_one(&self) -> S {
        S::one() - self.p01.clone()
    }
}

/// Outcome of solving for a flip strategy that makes the two received-bit
/// distributions equal.
#[derive(Debug, Clone, PartialEq)]
pub enum BlindingSolution<S> {
    /// No valid strategy exists; the coverage is too small.
    Impossible,
    /// Exactly one strategy blinds: full inversion.
    Unique(FlipStrategy<S>),
    /// Every `(p10, p01)` with `p10 - (1 - p01) = ratio` and
    /// `ratio <= p10 <= 1` blinds. `canonical` is the member with `p10 = 1`.
    Family { ratio: S, canonical: FlipStrategy<S> },
}

impl<S: Scalar> BlindingSolution<S> {
    pub fn is_possible(&self) -> bool {
        !matches!(self, Self::Impossible)
    }

    /// A representative blinding strategy, if any.
    pub fn strategy(&self) -> Option<&FlipStrategy<S>> {
        match self {
            Self::Impossible => None,
            Self::Unique(s) => Some(s),
            Self::Family { canonical, .. } => Some(canonical),
        }
    }

    /// The family member with the given `p10`, or `None` if `p10` is
    /// outside `[ratio, 1]` (or the solution is not a family).
    pub fn member(&self, p10: S) -> Option<FlipStrategy<S>> {
        match self {
            Self::Family { ratio, .. } if p10 >= *ratio && p10 <= S::one() => {
                let p01 = S::one() - p10.clone() + ratio.clone();
                Some(FlipStrategy { p10, p01 })
            }
            _ => None,
        }
    }
}

/// Fraction of nodes whose decisions pass through a Byzantine:
/// `t = sum_k P_k B_k / N`. Overlapping allocations may exceed 1.
pub fn coverage_fraction(shape: &TreeShape, alloc: &AttackAllocation) -> Result<Rational> {
    alloc.validate(shape)?;
    let covered: u128 = shape.profits().iter().zip(alloc.counts()).map(|(&p, &b)| p * u128::from(b)).sum();
    Ok(Rational::new(covered as i128, shape.total_nodes() as i128))
}

/// The same fraction written level by level: `sum_k beta_k sum_{i<=k} alpha_i`
/// with `alpha_i = B_i / N_i` and `beta_k = N_k / N`.
pub fn coverage_fraction_by_levels(shape: &TreeShape, alloc: &AttackAllocation) -> Result<Rational> {
    alloc.validate(shape)?;
    let mut prefix = Rational::from_integer(0);
    let mut t = Rational::from_integer(0);
    for k in shape.levels() {
        let alpha = Rational::new(alloc.at(k) as i128, shape.level_population(k)? as i128);
        prefix += alpha;
        t += shape.level_weight(k)? * prefix;
    }
    Ok(t)
}

/// Whether the allocation covers at least half of the network, which is
/// exactly when some flip strategy can blind the fusion center (for
/// identical honest and Byzantine sensors).
pub fn is_blinding(shape: &TreeShape, alloc: &AttackAllocation) -> Result<bool> {
    Ok(coverage_fraction(shape, alloc)? >= Rational::new(1, 2))
}

/// Solves for flip strategies that make the received-bit distributions
/// identical under both hypotheses at coverage `t`.
///
/// The required gap is `ratio = (1-t)/t * (pdH - pfaH) / (pdB - pfaB)`.
pub fn blinding_strategy<S: Scalar>(t: S, profile: &SensorProfile<S>) -> Result<BlindingSolution<S>> {
    if !is_probability(&t) {
        return domain(format!("coverage t = {t:?} outside [0, 1]"));
    }
    if t == S::zero() {
        return Ok(BlindingSolution::Impossible);
    }
    let honest_gap = profile.pd_honest.clone() - profile.pfa_honest.clone();
    let byz_gap = profile.pd_byzantine.clone() - profile.pfa_byzantine.clone();
    let ratio = (S::one() - t.clone()) / t * honest_gap / byz_gap;
    Ok(if ratio > S::one() {
        BlindingSolution::Impossible
    } else if ratio == S::one() {
        BlindingSolution::Unique(FlipStrategy::full_inversion())
    } else {
        let canonical = FlipStrategy { p10: S::one(), p01: ratio.clone() };
        BlindingSolution::Family { ratio, canonical }
    })
}
