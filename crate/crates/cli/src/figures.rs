//! Grids behind the five reference plots, with locked default parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::str::FromStr;

use byztree::designer::{brute_force_bilevel, design_robust_tree};
use byztree::divergence::{kld_of_attack, min_kld};
use byztree::knapsack::solve_llp;
use byztree::{AttackBudgetProblem, CostSchedule, DesignScenario, FlipStrategy, Profile, SensorProfile, TreeShape};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::table::{format_significant, ResultTable};
use crate::tasks::{format_list, outcome_label, to_f64};

pub const PD: f64 = 0.8;
pub const PFA: f64 = 0.2;
pub const F2_COVERAGE: f64 = 0.4;
pub const F2_STEPS: u32 = 100;
pub const F3_T_MAX: f64 = 0.5;
pub const F3_POINTS: u32 = 51;
pub const ATTACK_COSTS: [u64; 9] = [52, 48, 24, 16, 12, 8, 10, 6, 4];
pub const ATTACKER_BUDGET: u64 = 50;
pub const F4_BRANCHING: u64 = 2;
pub const F4_DEPTHS: (u32, u32) = (2, 9);
pub const F5_DEPTH: u32 = 6;
pub const F5_BRANCHINGS: (u64, u64) = (3, 11);
pub const DESIGN_COSTS: [u64; 10] = [52, 50, 25, 24, 16, 10, 8, 6, 5, 4];
pub const NETWORK_BUDGET: u64 = 400_000;
pub const N_MIN: u64 = 1400;
pub const F6_DEPTHS: (u32, u32) = (2, 10);
pub const F6_BRANCHINGS: (u64, u64) = (3, 11);

/// Canonical text of every default above, hashed by [`defaults_checksum`].
pub fn canonical_defaults() -> String {
    format!(
        "pd={PD:?};pfa={PFA:?};f2_t={F2_COVERAGE:?};f2_steps={F2_STEPS};f3_t_max={F3_T_MAX:?};f3_points={F3_POINTS};\
         attack_costs={ATTACK_COSTS:?};attacker_budget={ATTACKER_BUDGET};f4_a={F4_BRANCHING};f4_k={F4_DEPTHS:?};\
         f5_k={F5_DEPTH};f5_a={F5_BRANCHINGS:?};design_costs={DESIGN_COSTS:?};network_budget={NETWORK_BUDGET};\
         n_min={N_MIN};f6_k={F6_DEPTHS:?};f6_a={F6_BRANCHINGS:?}"
    )
}

/// SHA-256 of [`canonical_defaults`], lowercase hex.
pub fn defaults_checksum() -> String {
    Sha256::digest(canonical_defaults().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    F2,
    F3,
    F4,
    F5,
    F6,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::F2 => "f2",
            FigureId::F3 => "f3",
            FigureId::F4 => "f4",
            FigureId::F5 => "f5",
            FigureId::F6 => "f6",
        }
    }
}

/// `key=value` overrides of a figure's defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides(BTreeMap<String, String>);

impl Overrides {
    pub fn parse<S: AsRef<str>>(pairs: &[S]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for pair in pairs {
            let pair = pair.as_ref();
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override `{pair}` is not of the form key=value")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Reads overrides by key and rejects any that go unread.
struct Params<'a> {
    given: &'a Overrides,
    read: BTreeSet<&'static str>,
    applied: Vec<String>,
}

impl<'a> Params<'a> {
    fn new(given: &'a Overrides) -> Self {
        Self { given, read: BTreeSet::new(), applied: Vec::new() }
    }

    fn get<T: FromStr>(&mut self, key: &'static str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.read.insert(key);
        match self.given.0.get(key) {
            None => Ok(default),
            Some(raw) => {
                self.applied.push(format!("{key}={raw}"));
                raw.parse().map_err(|e: T::Err| CliError::Override { key: key.into(), reason: e.to_string() })
            }
        }
    }

    /// A comma-separated list.
    fn list<T: FromStr + Clone>(&mut self, key: &'static str, default: &[T]) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.read.insert(key);
        match self.given.0.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => {
                self.applied.push(format!("{key}={raw}"));
                raw.split(',')
                    .map(|item| {
                        item.trim()
                            .parse()
                            .map_err(|e: T::Err| CliError::Override { key: key.into(), reason: e.to_string() })
                    })
                    .collect()
            }
        }
    }

    fn check<T>(&self, key: &'static str, value: Result<T>) -> Result<T> {
        value.map_err(|e| CliError::Override { key: key.into(), reason: e.to_string() })
    }

    fn finish(self, table: &mut ResultTable) -> Result<()> {
        if let Some(unknown) = self.given.0.keys().find(|k| !self.read.contains(k.as_str())) {
            let known: Vec<_> = self.read.iter().copied().collect();
            return Err(CliError::Override {
                key: unknown.clone(),
                reason: format!("not a parameter of this figure (expected one of {})", known.join(", ")),
            });
        }
        table.set_meta("overrides", if self.applied.is_empty() { "none".into() } else { self.applied.join(" ") });
        Ok(())
    }
}

fn profile(params: &mut Params) -> Result<Profile> {
    let pd = params.get("pd", PD)?;
    let pfa = params.get("pfa", PFA)?;
    params.check("pd", SensorProfile::identical(pd, pfa).map_err(CliError::from))
}

fn range<T: Copy + PartialOrd + FromStr + Debug>(
    params: &mut Params,
    (lo_key, hi_key): (&'static str, &'static str),
    (lo, hi): (T, T),
) -> Result<(T, T)>
where
    T::Err: std::fmt::Display,
{
    let lo = params.get(lo_key, lo)?;
    let hi = params.get(hi_key, hi)?;
    if lo > hi {
        return Err(CliError::Override { key: lo_key.into(), reason: format!("{lo:?} exceeds {hi_key} = {hi:?}") });
    }
    Ok((lo, hi))
}

fn schedule(params: &mut Params, default: &[u64]) -> Result<CostSchedule> {
    let costs = params.list("costs", default)?;
    params.check("costs", CostSchedule::new(costs).map_err(CliError::from))
}

pub fn run_figure(id: FigureId, overrides: &Overrides) -> Result<ResultTable> {
    let mut params = Params::new(overrides);
    let command = format!("figure {}", id.name());
    let mut table = match id {
        FigureId::F2 => figure2(&command, &mut params)?,
        FigureId::F3 => figure3(&command, &mut params)?,
        FigureId::F4 => figure4(&command, &mut params)?,
        FigureId::F5 => figure5(&command, &mut params)?,
        FigureId::F6 => figure6(&command, &mut params)?,
    };
    table.set_meta("defaults_sha256", defaults_checksum());
    params.finish(&mut table)?;
    Ok(table)
}

/// KLD over the `(p10, p01)` grid at fixed coverage.
fn figure2(command: &str, params: &mut Params) -> Result<ResultTable> {
    let profile = profile(params)?;
    let t: f64 = params.get("t", F2_COVERAGE)?;
    let steps: u32 = params.get("steps", F2_STEPS)?;
    if steps == 0 {
        return Err(CliError::Override { key: "steps".into(), reason: "must be positive".into() });
    }
    let cells: Vec<(u32, u32)> = (0..=steps).flat_map(|i| (0..=steps).map(move |j| (i, j))).collect();
    let values = cells
        .par_iter()
        .map(|&(i, j)| {
            let s = FlipStrategy::new(f64::from(i) / f64::from(steps), f64::from(j) / f64::from(steps))?;
            kld_of_attack(t, &profile, &s).map(|d| (s, d))
        })
        .collect::<byztree::Result<Vec<_>>>();
    let values = params.check("t", values.map_err(CliError::from))?;

    let mut table = ResultTable::new(command, None, &["p10", "p01", "kld"]);
    table.set_meta("t", t);
    let mut best: Option<(FlipStrategy<f64>, f64)> = None;
    for (s, d) in values {
        if best.as_ref().is_none_or(|b| d < b.1) {
            best = Some((s.clone(), d));
        }
        table.push_row(vec![s.p10.into(), s.p01.into(), d.into()])?;
    }
    let (s, d) = best.expect("grid is non-empty");
    table.set_meta("argmin", format!("({}, {}) kld={}", s.p10, s.p01, format_significant(d)));
    Ok(table)
}

/// Optimal attack divergence as coverage grows.
fn figure3(command: &str, params: &mut Params) -> Result<ResultTable> {
    let profile = profile(params)?;
    let t_max: f64 = params.get("t_max", F3_T_MAX)?;
    let points: u32 = params.get("points", F3_POINTS)?;
    if points < 2 {
        return Err(CliError::Override { key: "points".into(), reason: "need at least 2".into() });
    }
    let mut table = ResultTable::new(command, None, &["t", "d_star", "p10", "p01"]);
    for i in 0..points {
        let t = t_max * f64::from(i) / f64::from(points - 1);
        let best = params.check("t_max", min_kld(t, &profile).map_err(CliError::from))?;
        table.push_row(vec![t.into(), best.divergence.into(), best.strategy.p10.into(), best.strategy.p01.into()])?;
    }
    Ok(table)
}

fn coverage_row(shape: TreeShape, schedule: &CostSchedule, budget: u64) -> Result<Vec<crate::table::Cell>> {
    let sol = solve_llp(&AttackBudgetProblem::new(shape, schedule.clone(), budget)?)?;
    Ok(vec![
        shape.depth().into(),
        shape.branching().into(),
        shape.total_nodes().into(),
        sol.covered_nodes.into(),
        to_f64(&sol.coverage).into(),
        sol.spent.into(),
        sol.blind.into(),
    ])
}

const COVERAGE_COLUMNS: [&str; 7] = ["K", "a", "N", "covered_nodes", "t", "spent", "blind"];

/// Attacker best-response coverage against depth.
fn figure4(command: &str, params: &mut Params) -> Result<ResultTable> {
    let a: u64 = params.get("a", F4_BRANCHING)?;
    let (k_lo, k_hi) = range(params, ("k_min", "k_max"), F4_DEPTHS)?;
    let budget: u64 = params.get("budget", ATTACKER_BUDGET)?;
    let sched = schedule(params, &ATTACK_COSTS)?;
    let mut table = ResultTable::new(command, None, &COVERAGE_COLUMNS);
    table.set_meta("costs", format_list(sched.as_slice()));
    table.set_meta("budget", budget);
    for k in k_lo..=k_hi {
        let shape = params.check("a", TreeShape::new(k, a).map_err(CliError::from))?;
        table.push_row(params.check("costs", coverage_row(shape, &sched, budget))?)?;
    }
    Ok(table)
}

/// Attacker best-response coverage against branching factor.
fn figure5(command: &str, params: &mut Params) -> Result<ResultTable> {
    let k: u32 = params.get("k", F5_DEPTH)?;
    let (a_lo, a_hi) = range(params, ("a_min", "a_max"), F5_BRANCHINGS)?;
    let budget: u64 = params.get("budget", ATTACKER_BUDGET)?;
    let sched = schedule(params, &ATTACK_COSTS)?;
    let mut table = ResultTable::new(command, None, &COVERAGE_COLUMNS);
    table.set_meta("costs", format_list(sched.as_slice()));
    table.set_meta("budget", budget);
    for a in a_lo..=a_hi {
        let shape = params.check("k", TreeShape::new(k, a).map_err(CliError::from))?;
        table.push_row(params.check("costs", coverage_row(shape, &sched, budget))?)?;
    }
    Ok(table)
}

/// Minimum attack divergence over `(K, a)` with deployment feasibility and
/// the robust-design pick.
fn figure6(command: &str, params: &mut Params) -> Result<ResultTable> {
    let profile = profile(params)?;
    let (k_lo, k_hi) = range(params, ("k_min", "k_max"), F6_DEPTHS)?;
    let (a_lo, a_hi) = range(params, ("a_min", "a_max"), F6_BRANCHINGS)?;
    let network_budget: u64 = params.get("network_budget", NETWORK_BUDGET)?;
    let attacker_budget: u64 = params.get("budget", ATTACKER_BUDGET)?;
    let n_min: u64 = params.get("n_min", N_MIN)?;
    let sched = schedule(params, &DESIGN_COSTS)?;
    let scenario = params.check(
        "k_min",
        DesignScenario::new(
            sched.clone(),
            u128::from(network_budget),
            attacker_budget,
            (a_lo, a_hi),
            k_lo,
            u128::from(n_min),
        )
        .map_err(CliError::from),
    )?;
    let pick = design_robust_tree(&scenario)?;
    let report = params.check("k_max", brute_force_bilevel(&scenario, k_hi).map_err(CliError::from))?;

    let mut table =
        ResultTable::new(command, None, &["K", "a", "N", "deployment_cost", "feasible", "t", "min_kld", "pick"]);
    table.set_meta("costs", format_list(sched.as_slice()));
    table.set_meta("pick", outcome_label(&pick));
    table.set_meta("bilevel_pick", outcome_label(&report.outcome));
    for row in &report.table {
        let t = row.response.as_ref().map(|r| to_f64(&r.coverage).min(1.0));
        let divergence = match t {
            Some(t) => min_kld(t, &profile)?.divergence,
            None => f64::NAN,
        };
        let picked = pick.shape().is_some_and(|s| s.depth() == row.depth && s.branching() == row.branching);
        table.push_row(vec![
            row.depth.into(),
            row.branching.into(),
            row.nodes.map_or(f64::NAN.into(), Into::into),
            row.deployment_cost.map_or(f64::NAN.into(), Into::into),
            row.feasible.into(),
            t.unwrap_or(f64::NAN).into(),
            divergence.into(),
            picked.into(),
        ])?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_syntax() {
        assert!(Overrides::parse(&["t"]).is_err());
        let o = Overrides::parse(&["t = 0.3"]).unwrap();
        assert_eq!(o.0.get("t").map(String::as_str), Some("0.3"));
    }

    #[test]
    fn canonical_defaults_cover_every_constant() {
        let text = canonical_defaults();
        for needle in ["pd=0.8", "pfa=0.2", "f2_t=0.4", "[52, 48, 24, 16, 12, 8, 10, 6, 4]", "network_budget=400000"] {
            assert!(text.contains(needle), "{needle} missing from {text}");
        }
    }
}
