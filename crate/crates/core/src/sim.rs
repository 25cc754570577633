//! Monte Carlo checks of the received-bit distributions.
//!
//! Two samplers are provided. [`simulate_fc_view`] draws bits the way the
//! fusion center models them: covered with probability `t`, then sensed and
//! possibly flipped. [`simulate_tree`] builds the actual tree, places
//! Byzantines at explicit nodes and forwards every node's bit to the root.
//!
//! Samples are split into [`CHUNKS`] fixed chunks, chunk `i` drawing from
//! ChaCha8 stream `i` under the configured seed, so results do not depend on
//! the number of worker threads.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attack::{AttackAllocation, FlipStrategy, SensorProfile};
use crate::divergence::{kld, BitDistributionPair};
use crate::error::{domain, Error, Result};
use crate::knapsack::leaf_demand;
use crate::scalar::is_probability;
use crate::topology::TreeShape;
use crate::Rational;

/// Generator identifier reported alongside simulation output.
pub const RNG_ALGORITHM: &str = "chacha8-stream-per-chunk";

pub const CHUNKS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    FcView,
    TreePropagation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Samples per hypothesis for the FC view, propagation rounds for trees.
    pub samples: u64,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    pub fn new(samples: u64, seed: u64, mode: SimMode) -> Result<Self> {
        if samples == 0 {
            return domain("at least one sample is required");
        }
        Ok(Self { samples, seed, mode })
    }
}

/// Empirical `P(z=1|H1)` and `P(z=1|H0)` with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalPair {
    pub pi11_hat: f64,
    pub pi10_hat: f64,
    pub std_err11: f64,
    pub std_err10: f64,
    /// Bits observed per hypothesis.
    pub trials: u64,
}

impl EmpiricalPair {
    fn from_counts(ones_h1: u64, ones_h0: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p1 = ones_h1 as f64 / n;
        let p0 = ones_h0 as f64 / n;
        Self {
            pi11_hat: p1,
            pi10_hat: p0,
            std_err11: (p1 * (1.0 - p1) / n).sqrt(),
            std_err10: (p0 * (1.0 - p0) / n).sqrt(),
            trials,
        }
    }

    pub fn kld_estimate(&self) -> f64 {
        kld(&BitDistributionPair { pi11: self.pi11_hat, pi10: self.pi10_hat })
    }

    /// Largest deviation from `analytic`, in units of the standard error.
    /// A zero standard error counts as one unit of `1/trials`.
    pub fn max_z_score(&self, analytic: &BitDistributionPair<f64>) -> f64 {
        let floor = 1.0 / self.trials as f64;
        let z11 = (self.pi11_hat - analytic.pi11).abs() / self.std_err11.max(floor);
        let z10 = (self.pi10_hat - analytic.pi10).abs() / self.std_err10.max(floor);
        z11.max(z10)
    }
}

fn chunk_sizes(total: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let base = total / CHUNKS;
    let extra = total % CHUNKS;
    (0..CHUNKS).into_par_iter().map(move |i| (i, base + u64::from(i < extra)))
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn apply_flip(rng: &mut ChaCha8Rng, bit: bool, strat: &FlipStrategy<f64>) -> bool {
    if bit {
        !rng.random_bool(strat.p01)
    } else {
        rng.random_bool(strat.p10)
    }
}

fn check_inputs(profile: &SensorProfile<f64>, strat: &FlipStrategy<f64>) -> Result<()> {
    let probs =
        [profile.pd_honest, profile.pfa_honest, profile.pd_byzantine, profile.pfa_byzantine, strat.p10, strat.p01];
    if !probs.iter().all(is_probability) {
        return domain("profile and strategy entries must be probabilities");
    }
    Ok(())
}

/// Samples the fusion center's probabilistic view at coverage `t`.
pub fn simulate_fc_view(
    t: f64,
    profile: &SensorProfile<f64>,
    strat: &FlipStrategy<f64>,
    cfg: &SimConfig,
) -> Result<EmpiricalPair> {
    if !is_probability(&t) {
        return domain(format!("coverage t = {t} outside [0, 1]"));
    }
    check_inputs(profile, strat)?;
    let (ones_h1, ones_h0) = chunk_sizes(cfg.samples)
        .map(|(chunk, n)| {
            let mut rng = chunk_rng(cfg.seed, chunk);
            let mut ones = (0u64, 0u64);
            for _ in 0..n {
                for (hyp, detect_honest, detect_byz) in
                    [(1, profile.pd_honest, profile.pd_byzantine), (0, profile.pfa_honest, profile.pfa_byzantine)]
                {
                    let covered = rng.random_bool(t);
                    let mut bit = rng.random_bool(if covered { detect_byz } else { detect_honest });
                    if covered {
                        bit = apply_flip(&mut rng, bit, strat);
                    }
                    if bit {
                        if hyp == 1 {
                            ones.0 += 1;
                        } else {
                            ones.1 += 1;
                        }
                    }
                }
            }
            ones
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(EmpiricalPair::from_counts(ones_h1, ones_h0, cfg.samples))
}

/// A node of the tree: `index` runs over `0..a^level`, and the parent of
/// `(level, i)` is `(level - 1, i / a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub level: u32,
    pub index: u64,
}

/// An explicit set of Byzantine nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Placement {
    nodes: Vec<NodeId>,
}

impl Placement {
    pub fn new(nodes: Vec<NodeId>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Places the allocation with one Byzantine per path, packing captured
    /// subtrees from the left, highest levels first. Fails when the counts
    /// need more leaves than the tree has.
    pub fn spread(shape: &TreeShape, alloc: &AttackAllocation) -> Result<Self> {
        let demand = leaf_demand(shape, alloc)?;
        let leaves = shape.level_population(shape.depth())?;
        if demand > leaves {
            return Err(Error::OverlappingPlacement(format!("counts need {demand} leaves, {shape} has {leaves}")));
        }
        // Larger aligned blocks go first, so the cursor stays aligned to
        // every later block size.
        let mut cursor = 0u128;
        let mut nodes = Vec::with_capacity(alloc.total() as usize);
        for k in shape.levels() {
            let width = shape.leaves_below(k)?;
            for _ in 0..alloc.at(k) {
                nodes.push(NodeId { level: k, index: (cursor / width) as u64 });
                cursor += width;
            }
        }
        Ok(Self { nodes })
    }

    /// Per-level counts of the placement.
    pub fn allocation(&self, depth: u32) -> AttackAllocation {
        let mut counts = vec![0u64; depth as usize];
        for n in &self.nodes {
            counts[n.level as usize - 1] += 1;
        }
        AttackAllocation::new(counts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeRole {
    Honest,
    /// Honest sensor whose bits cross a Byzantine ancestor.
    Covered,
    Byzantine,
}

/// Output of [`simulate_tree`].
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSimResult {
    pub pair: EmpiricalPair,
    /// Nodes whose bits pass through a Byzantine, counted structurally.
    pub covered_nodes: u128,
    /// `covered_nodes / N`.
    pub coverage: Rational,
}

/// Number of nodes [`simulate_tree`] is willing to materialize.
pub const MAX_TREE_NODES: u128 = 1 << 22;

fn materialize(shape: &TreeShape, placement: &Placement) -> Result<Vec<NodeRole>> {
    if shape.total_nodes() > MAX_TREE_NODES {
        return domain(format!("{shape} has more than {MAX_TREE_NODES} nodes"));
    }
    let mut byzantine = HashSet::new();
    for n in placement.nodes() {
        if n.level == 0 || n.level > shape.depth() || u128::from(n.index) >= shape.level_population(n.level)? {
            return domain(format!("node {n:?} is not in {shape}"));
        }
        if !byzantine.insert(*n) {
            return domain(format!("node {n:?} listed twice"));
        }
    }
    let a = shape.branching();
    let mut roles = Vec::with_capacity(shape.total_nodes() as usize);
    let mut parent_covered: Vec<bool> = vec![false];
    for k in shape.levels() {
        let population = shape.level_population(k)? as u64;
        let mut covered = Vec::with_capacity(population as usize);
        for i in 0..population {
            let above = parent_covered[(i / a) as usize];
            let here = byzantine.contains(&NodeId { level: k, index: i });
            if above && here {
                return Err(Error::OverlappingPlacement(format!("node ({k}, {i}) has a Byzantine ancestor")));
            }
            roles.push(if here {
                NodeRole::Byzantine
            } else if above {
                NodeRole::Covered
            } else {
                NodeRole::Honest
            });
            covered.push(above || here);
        }
        parent_covered = covered;
    }
    Ok(roles)
}

/// Propagates every node's decision to the fusion center for
/// `cfg.samples` rounds per hypothesis.
///
/// Byzantines sense with the Byzantine profile and flip both their own bit
/// and every bit they forward; all other nodes sense with the honest
/// profile. Each round yields `N` bits per hypothesis.
pub fn simulate_tree(
    shape: &TreeShape,
    placement: &Placement,
    profile: &SensorProfile<f64>,
    strat: &FlipStrategy<f64>,
    cfg: &SimConfig,
) -> Result<TreeSimResult> {
    check_inputs(profile, strat)?;
    let roles = materialize(shape, placement)?;
    let covered_nodes = roles.iter().filter(|r| **r != NodeRole::Honest).count() as u128;

    let (ones_h1, ones_h0) = chunk_sizes(cfg.samples)
        .map(|(chunk, rounds)| {
            let mut rng = chunk_rng(cfg.seed, chunk);
            let mut ones = (0u64, 0u64);
            for _ in 0..rounds {
                for (hyp, detect_honest, detect_byz) in
                    [(1, profile.pd_honest, profile.pd_byzantine), (0, profile.pfa_honest, profile.pfa_byzantine)]
                {
                    for role in &roles {
                        let bit = match role {
                            NodeRole::Honest => rng.random_bool(detect_honest),
                            NodeRole::Covered => {
                                let b = rng.random_bool(detect_honest);
                                apply_flip(&mut rng, b, strat)
                            }
                            NodeRole::Byzantine => {
                                let b = rng.random_bool(detect_byz);
                                apply_flip(&mut rng, b, strat)
                            }
                        };
                        if bit {
                            if hyp == 1 {
                                ones.0 += 1;
                            } else {
                                ones.1 += 1;
                            }
                        }
                    }
                }
            }
            ones
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let trials = cfg.samples * roles.len() as u64;
    Ok(TreeSimResult {
        pair: EmpiricalPair::from_counts(ones_h1, ones_h0, trials),
        covered_nodes,
        coverage: Rational::new(covered_nodes as i128, shape.total_nodes() as i128),
    })
}
