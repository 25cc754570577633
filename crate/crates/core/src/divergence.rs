//! Received-bit distributions at the fusion center and the Kullback-Leibler
//! divergence between them.
//!
//! Every sensor bit reaching the fusion center is treated as coming from a
//! covered node with probability `t`. Covered bits follow the Byzantine
//! sensor profile and are flipped per the [`FlipStrategy`]; the rest follow
//! the honest profile unchanged. With `pi11 = P(z=1|H1)` and
//! `pi10 = P(z=1|H0)`, the attacker tries to drive
//! `D = pi11 ln(pi11/pi10) + (1-pi11) ln((1-pi11)/(1-pi10))` to zero.

use crate::attack::{blinding_strategy, FlipStrategy, SensorProfile};
use crate::error::{domain, Result};
use crate::scalar::{is_probability, Real, Scalar};

/// `pi11 = P(z = 1 | H1)` and `pi10 = P(z = 1 | H0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BitDistributionPair<S> {
    pub pi11: S,
    pub pi10: S,
}

/// Which flip probability carries the deviation from a symmetric strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationAxis {
    /// `(p10, p01) = (p, p - eps)`.
    SendZeroGivenOne,
    /// `(p10, p01) = (p - eps, p)`.
    SendOneGivenZero,
}

impl DeviationAxis {
    pub const BOTH: [DeviationAxis; 2] = [DeviationAxis::SendZeroGivenOne, DeviationAxis::SendOneGivenZero];

    /// The strategy obtained by deviating `eps` below the symmetric point `p`.
    pub fn strategy<S: Scalar>(self, p: S, eps: S) -> FlipStrategy<S> {
        let lowered = p.clone() - eps;
        match self {
            Self::SendZeroGivenOne => FlipStrategy { p10: p, p01: lowered },
            Self::SendOneGivenZero => FlipStrategy { p10: lowered, p01: p },
        }
    }
}

/// The optimal attack at a given coverage and its divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalAttack<F> {
    pub strategy: FlipStrategy<F>,
    pub divergence: F,
}

/// Distribution of one received bit under each hypothesis.
///
/// Works over any [`Scalar`], so exact rationals give exact results.
pub fn received_distributions<S: Scalar>(
    t: S,
    profile: &SensorProfile<S>,
    strat: &FlipStrategy<S>,
) -> Result<BitDistributionPair<S>> {
    if !is_probability(&t) {
        return domain(format!("coverage t = {t:?} outside [0, 1]"));
    }
    let keep_one = strat.keep_one();
    let one_minus_t = S::one() - t.clone();
    let sent_one = |p_byz: &S, p_honest: &S| {
        let byzantine = strat.p10.clone() * (S::one() - p_byz.clone()) + keep_one.clone() * p_byz.clone();
        t.clone() * byzantine + one_minus_t.clone() * p_honest.clone()
    };
    Ok(BitDistributionPair {
        pi11: sent_one(&profile.pd_byzantine, &profile.pd_honest),
        pi10: sent_one(&profile.pfa_byzantine, &profile.pfa_honest),
    })
}

/// `p ln(p/q)` with `0 ln(0/q) = 0` and `p ln(p/0) = +inf` for `p > 0`.
fn kl_term<F: Real>(p: F, q: F) -> F {
    if p == F::zero() {
        F::zero()
    } else if q == F::zero() {
        F::infinity()
    } else {
        p * (p / q).ln()
    }
}

/// Natural-log KL divergence `D(pi_{.,1} || pi_{.,0})` between the two
/// Bernoulli laws. Returns `+inf` when `H0` assigns zero mass to an outcome
/// that `H1` can produce.
pub fn kld<F: Real>(dist: &BitDistributionPair<F>) -> F {
    let (p, q) = (dist.pi11, dist.pi10);
    let d = kl_term(p, q) + kl_term(F::one() - p, F::one() - q);
    // Rounding can push an exact zero slightly negative.
    d.max(F::zero())
}

pub fn kld_of_attack<F: Real>(t: F, profile: &SensorProfile<F>, strat: &FlipStrategy<F>) -> Result<F> {
    Ok(kld(&received_distributions(t, profile, strat)?))
}

fn require_identical<S: Scalar>(profile: &SensorProfile<S>) -> Result<()> {
    if !profile.is_identical() {
        return domain("this analysis assumes honest and Byzantine sensors share pd and pfa");
    }
    Ok(())
}

/// Chain rule through the two distribution parameters.
fn directional_derivative<F: Real>(dist: &BitDistributionPair<F>, d_pi11: F, d_pi10: F) -> F {
    let (p, q) = (dist.pi11, dist.pi10);
    let one = F::one();
    let wrt_pi11 = (p / q).ln() - ((one - p) / (one - q)).ln();
    let wrt_pi10 = (one - p) / (one - q) - p / q;
    wrt_pi11 * d_pi11 + wrt_pi10 * d_pi10
}

/// `dD/d eps` along `(p, p - eps)` or `(p - eps, p)`, depending on `axis`.
///
/// Positive whenever `t < 1/2`, `pd > pfa` and `0 < eps <= p`: moving away
/// from a symmetric strategy leaks information to the fusion center.
pub fn dkld_deps<F: Real>(t: F, profile: &SensorProfile<F>, p: F, eps: F, axis: DeviationAxis) -> Result<F> {
    require_identical(profile)?;
    if !(F::zero() <= eps && eps <= p && p <= F::one()) {
        return domain(format!("need 0 <= eps <= p <= 1, got p = {p:?}, eps = {eps:?}"));
    }
    let dist = received_distributions(t, profile, &axis.strategy(p, eps))?;
    let (pd, pfa) = (profile.pd_honest, profile.pfa_honest);
    let (d11, d10) = match axis {
        DeviationAxis::SendZeroGivenOne => (t * pd, t * pfa),
        DeviationAxis::SendOneGivenZero => (-t * (F::one() - pd), -t * (F::one() - pfa)),
    };
    Ok(directional_derivative(&dist, d11, d10))
}

/// `dD/dp` along the symmetric line `p10 = p01 = p`. Negative for `t < 1/2`.
pub fn dkld_dp<F: Real>(t: F, profile: &SensorProfile<F>, p: F) -> Result<F> {
    require_identical(profile)?;
    if !is_probability(&p) {
        return domain(format!("flip probability {p:?} outside [0, 1]"));
    }
    let dist = received_distributions(t, profile, &FlipStrategy { p10: p, p01: p })?;
    let two = F::one() + F::one();
    let (pd, pfa) = (profile.pd_honest, profile.pfa_honest);
    Ok(directional_derivative(&dist, t * (F::one() - two * pd), t * (F::one() - two * pfa)))
}

/// Minimum divergence the attacker can reach at coverage `t`.
///
/// Below one half, full inversion `(1, 1)` is optimal. From one half on, a
/// blinding strategy exists and the minimum is exactly zero.
pub fn min_kld<F: Real>(t: F, profile: &SensorProfile<F>) -> Result<OptimalAttack<F>> {
    require_identical(profile)?;
    if !is_probability(&t) {
        return domain(format!("coverage t = {t:?} outside [0, 1]"));
    }
    if t < F::half() {
        let strategy = FlipStrategy::full_inversion();
        let divergence = kld_of_attack(t, profile, &strategy)?;
        return Ok(OptimalAttack { strategy, divergence });
    }
    let solution = blinding_strategy(t, profile)?;
    let strategy =
        solution.strategy().cloned().expect("coverage of at least one half always admits a blinding strategy");
    Ok(OptimalAttack { strategy, divergence: F::zero() })
}

/// `D*(t)` sampled on an ascending grid inside `[0, 1/2]`.
pub fn d_star_curve<F: Real>(profile: &SensorProfile<F>, grid: &[F]) -> Result<Vec<(F, F)>> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return domain("coverage grid must be sorted ascending");
    }
    if let Some(t) = grid.iter().find(|&&t| t < F::zero() || t > F::half()) {
        return domain(format!("grid point {t:?} outside [0, 1/2]"));
    }
    grid.iter().map(|&t| Ok((t, min_kld(t, profile)?.divergence))).collect()
}
