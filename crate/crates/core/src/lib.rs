//! Byzantine data-falsification attacks on perfect a-ary tree detection
//! networks, and robust tree design against them.
//!
//! * [`topology`]: exact level populations, weights, profits and costs.
//! * [`attack`]: coverage accounting and the blinding condition.
//! * [`divergence`]: received-bit distributions, KL divergence, optimal flips.
//! * [`knapsack`]: the attacker's budgeted capture problem.
//! * [`designer`]: the designer's choice of `(K, a)`.
//! * [`sim`]: Monte Carlo checks of the analytic distributions.
//!
//! Probability routines are generic over [`Scalar`]; the aliases below fix
//! the common instantiations.

pub mod attack;
pub mod designer;
pub mod divergence;
pub mod error;
pub mod knapsack;
pub mod scalar;
pub mod sim;
pub mod topology;

pub use attack::{AttackAllocation, BlindingSolution, FlipStrategy, SensorProfile};
pub use designer::{DesignOutcome, DesignScenario};
pub use divergence::{BitDistributionPair, DeviationAxis, OptimalAttack};
pub use error::{Error, Result};
pub use knapsack::{Arrangement, AttackBudgetProblem, AttackSolution};
pub use scalar::{Real, Scalar};
pub use topology::{CostSchedule, TreeShape};

/// Exact rational used for coverage fractions and exact distribution checks.
pub type Rational = num_rational::Ratio<i128>;

pub type Profile = SensorProfile<f64>;
pub type Strategy = FlipStrategy<f64>;
pub type Distributions = BitDistributionPair<f64>;
pub type Blinding = BlindingSolution<f64>;

pub type ExactProfile = SensorProfile<Rational>;
pub type ExactStrategy = FlipStrategy<Rational>;
pub type ExactDistributions = BitDistributionPair<Rational>;
pub type ExactBlinding = BlindingSolution<Rational>;
