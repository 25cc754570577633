//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p byztree --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use byztree::attack::{blinding_strategy, coverage_fraction, is_blinding};
use byztree::designer::{branching_inequalities, brute_force_bilevel, design_robust_tree};
use byztree::divergence::{d_star_curve, dkld_deps, dkld_dp, kld_of_attack, received_distributions};
use byztree::knapsack::{brute_force_llp, classify_arrangement, solve_llp};
use byztree::sim::{simulate_fc_view, simulate_tree, Placement, SimConfig, SimMode};
use byztree::{
    Arrangement, AttackAllocation, AttackBudgetProblem, AttackSolution, CostSchedule, DesignOutcome, DesignScenario,
    DeviationAxis, Error, ExactProfile, FlipStrategy, Profile, Rational, SensorProfile, TreeShape,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ATTACK_COSTS: [u64; 9] = [52, 48, 24, 16, 12, 8, 10, 6, 4];
const DESIGN_COSTS: [u64; 10] = [52, 50, 25, 24, 16, 10, 8, 6, 5, 4];
const GRID_MIN_KLD: f64 = 0.028939;
const D_STAR_AT_ZERO: f64 = 0.831777;
const VALUE_TOL: f64 = 1e-5;
const CONVEXITY_TOL: f64 = 1e-9;
const FD_STEP: f64 = 1e-6;
const FD_REL_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn small_shapes() -> Vec<TreeShape> {
    [(2, 2), (2, 3), (3, 2), (3, 3)].iter().map(|&(k, a)| TreeShape::new(k, a).unwrap()).collect()
}

/// Every allocation with `0 <= B_k <= a^k`.
fn all_allocations(shape: &TreeShape) -> Vec<AttackAllocation> {
    let caps: Vec<u64> = shape.levels().map(|k| shape.level_population(k).unwrap() as u64).collect();
    let mut out = Vec::new();
    let mut cur = vec![0u64; caps.len()];
    loop {
        out.push(AttackAllocation::new(cur.clone()));
        let mut i = cur.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < caps[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
    }
}

fn reference_profile() -> Profile {
    SensorProfile::identical(0.8, 0.2).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let q = Rational::new;
    let profile = ExactProfile::identical(q(4, 5), q(1, 5)).unwrap();
    let mut checked = 0;
    for shape in small_shapes() {
        for alloc in all_allocations(&shape) {
            let t = coverage_fraction(&shape, &alloc).unwrap();
            let blind = is_blinding(&shape, &alloc).unwrap();
            check(blind == (t >= q(1, 2)), || format!("{shape} {alloc:?}: is_blinding disagrees with t = {t}"))?;
            // Overlapping counts can exceed full coverage; the fusion
            // center can never see more than every bit covered.
            let t_eff = t.min(q(1, 1));
            let solution = blinding_strategy(t_eff, &profile).unwrap();
            check(blind == solution.is_possible(), || {
                format!("{shape} {alloc:?}: strategy solver disagrees at t = {t}")
            })?;
            if let Some(s) = solution.strategy() {
                let d = received_distributions(t_eff, &profile, s).unwrap();
                check(d.pi11 == d.pi10, || format!("{shape} {alloc:?}: {s:?} does not blind"))?;
            }
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{checked} allocations, exact"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let profile = reference_profile();
    let mut cells = Vec::with_capacity(101 * 101);
    for i in 0..=100 {
        for j in 0..=100 {
            let s = FlipStrategy::new(i as f64 / 100.0, j as f64 / 100.0).unwrap();
            cells.push(((i, j), kld_of_attack(0.4, &profile, &s).unwrap()));
        }
    }
    let (argmin, min) = cells.iter().copied().fold(((0, 0), f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    check(argmin == (100, 100), || format!("argmin at {argmin:?}"))?;
    let ties = cells.iter().filter(|c| c.1 <= min).count();
    check(ties == 1, || format!("minimum {min} attained at {ties} cells"))?;
    check((min - GRID_MIN_KLD).abs() <= VALUE_TOL, || format!("min KLD {min}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("argmin (1, 1), min KLD {min:.6}"))
}

fn criterion_3() -> Outcome {
    let grid: Vec<f64> = (0..50).map(|i| 0.5 * i as f64 / 49.0).collect();
    let curve = d_star_curve(&reference_profile(), &grid).unwrap();
    let values: Vec<f64> = curve.iter().map(|p| p.1).collect();
    check((values[0] - D_STAR_AT_ZERO).abs() <= VALUE_TOL, || format!("D*(0) = {}", values[0]))?;
    check(values[49] == 0.0, || format!("D*(0.5) = {}", values[49]))?;
    check(values.windows(2).all(|w| w[1] < w[0]), || "not strictly decreasing".into())?;
    let worst = values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min);
    check(worst >= -CONVEXITY_TOL, || format!("second difference {worst}"))?;
    Ok(format!("D*(0) = {:.6}, D*(0.5) = 0, min second difference {worst:.3e}", values[0]))
}

fn relative_gap(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs())
}

fn criterion_4() -> Outcome {
    let profile = reference_profile();
    let kld_at =
        |t: f64, s: FlipStrategy<f64>| byztree::divergence::kld(&received_distributions(t, &profile, &s).unwrap());
    let t_grid = [0.05, 0.15, 0.25, 0.35, 0.45];
    let mut worst = 0.0f64;
    let mut points = 0;
    for &t in &t_grid {
        for i in 1..=10 {
            let p = i as f64 / 10.0;
            for j in 1..=10 {
                let eps = p * j as f64 / 10.0;
                for axis in DeviationAxis::BOTH {
                    let analytic = dkld_deps(t, &profile, p, eps, axis).unwrap();
                    // Finite differences through the unconstrained closed
                    // form, so points at eps = p are differentiable too.
                    let numeric = (kld_at(t, axis.strategy(p, eps + FD_STEP))
                        - kld_at(t, axis.strategy(p, eps - FD_STEP)))
                        / (2.0 * FD_STEP);
                    let gap = relative_gap(analytic, numeric);
                    worst = worst.max(gap);
                    check(gap <= FD_REL_TOL, || {
                        format!("dD/deps {axis:?} t={t} p={p} eps={eps}: {analytic} vs {numeric}")
                    })?;
                    check(analytic > 0.0, || format!("dD/deps {axis:?} t={t} p={p} eps={eps} = {analytic}"))?;
                    points += 1;
                }
            }
            let analytic = dkld_dp(t, &profile, p).unwrap();
            let sym = |x: f64| FlipStrategy { p10: x, p01: x };
            let numeric = (kld_at(t, sym(p + FD_STEP)) - kld_at(t, sym(p - FD_STEP))) / (2.0 * FD_STEP);
            let gap = relative_gap(analytic, numeric);
            worst = worst.max(gap);
            check(gap <= FD_REL_TOL, || format!("dD/dp t={t} p={p}: {analytic} vs {numeric}"))?;
            check(analytic < 0.0, || format!("dD/dp t={t} p={p} = {analytic}"))?;
            points += 1;
        }
    }
    Ok(format!("{points} points, worst relative gap {worst:.2e}"))
}

fn random_schedule(rng: &mut ChaCha8Rng, len: usize) -> CostSchedule {
    CostSchedule::new((0..len).map(|_| rng.random_range(1..=60)).collect()).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut instances = 0;
    for shape in small_shapes() {
        let k = shape.depth() as usize;
        let mut schedules = vec![CostSchedule::new(ATTACK_COSTS[..k].to_vec()).unwrap()];
        schedules.extend((0..6).map(|_| random_schedule(&mut rng, k)));
        for sched in schedules {
            let mut previous = Rational::from_integer(0);
            for budget in 0..=80 {
                let problem = AttackBudgetProblem::new(shape, sched.clone(), budget).unwrap();
                let dp = solve_llp(&problem).unwrap();
                let oracle = brute_force_llp(&problem).unwrap();
                check(dp.covered_nodes == oracle.covered_nodes, || {
                    format!(
                        "{shape} costs {:?} budget {budget}: DP {} vs oracle {}",
                        sched.as_slice(),
                        dp.covered_nodes,
                        oracle.covered_nodes
                    )
                })?;
                check(dp.spent <= u128::from(budget), || format!("DP overspends at budget {budget}"))?;
                check(dp.coverage >= previous, || format!("coverage fell at budget {budget}"))?;
                previous = dp.coverage;
                instances += 1;
            }
        }
    }
    check(instances >= 2000, || format!("only {instances} instances"))?;
    Ok(format!("{instances} instances, 0 mismatches"))
}

fn best_response(k: u32, a: u64, costs: &[u64], budget: u64) -> AttackSolution {
    let problem =
        AttackBudgetProblem::new(TreeShape::new(k, a).unwrap(), CostSchedule::new(costs.to_vec()).unwrap(), budget)
            .unwrap();
    let dp = solve_llp(&problem).unwrap();
    assert_eq!(dp.covered_nodes, brute_force_llp(&problem).unwrap().covered_nodes);
    dp
}

fn criterion_6() -> Outcome {
    let ts: Vec<Rational> = (2..=9).map(|k| best_response(k, 2, &ATTACK_COSTS, 50).coverage).collect();
    check(ts.windows(2).all(|w| w[0] <= w[1]), || format!("coverage over K: {ts:?}"))?;
    Ok(format!("t over K=2..9: {}", fmt_rationals(&ts)))
}

fn criterion_7() -> Outcome {
    let ts: Vec<Rational> = (3..=11).map(|a| best_response(6, a, &ATTACK_COSTS, 50).coverage).collect();
    let half = Rational::new(1, 2);
    check(ts.windows(2).all(|w| w[0] >= half || w[1] < w[0]), || format!("coverage over a: {ts:?}"))?;
    Ok(format!("t over a=3..11: {}", fmt_rationals(&ts)))
}

fn fmt_rationals(ts: &[Rational]) -> String {
    ts.iter().map(|t| format!("{:.4}", *t.numer() as f64 / *t.denom() as f64)).collect::<Vec<_>>().join(" ")
}

/// Descending costs with occasional adjacent swaps.
fn perturbed_schedule(rng: &mut ChaCha8Rng) -> CostSchedule {
    let mut costs = Vec::with_capacity(10);
    let mut cur: u64 = rng.random_range(40..90);
    for _ in 0..10 {
        costs.push(cur);
        cur = cur.saturating_sub(rng.random_range(1..9)).max(1);
    }
    for i in 0..9 {
        if rng.random_bool(0.2) {
            costs.swap(i, i + 1);
        }
    }
    CostSchedule::new(costs).unwrap()
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let reference =
        DesignScenario::new(CostSchedule::new(DESIGN_COSTS.to_vec()).unwrap(), 400_000, 50, (3, 11), 2, 1400).unwrap();
    let pick = design_robust_tree(&reference).unwrap();
    check(pick == DesignOutcome::Solution(TreeShape::new(3, 11).unwrap()), || {
        format!("reference scenario gave {pick:?}")
    })?;
    let reference_brute = brute_force_bilevel(&reference, 10).unwrap().outcome;
    check(reference_brute == pick, || format!("brute force gave {reference_brute:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut solved, mut infeasible) = (0, 0);
    for n in 0..100 {
        let a_max = rng.random_range(3..=11);
        let a_min = rng.random_range(2..=a_max.min(4));
        let scenario = DesignScenario::new(
            perturbed_schedule(&mut rng),
            rng.random_range(1_000..500_000),
            rng.random_range(5..120),
            (a_min, a_max),
            rng.random_range(2..=3),
            rng.random_range(1..3000),
        )
        .unwrap();
        let brute = brute_force_bilevel(&scenario, 10).unwrap().outcome;
        match design_robust_tree(&scenario) {
            Ok(DesignOutcome::Solution(shape)) => {
                check(brute == DesignOutcome::Solution(shape), || format!("scenario {n}: {shape} vs {brute:?}"))?;
                solved += 1;
            }
            // Running out of schedule levels means no shape within it works.
            Ok(DesignOutcome::Infeasible) | Err(Error::Config(_)) => {
                check(brute == DesignOutcome::Infeasible, || format!("scenario {n}: infeasible vs {brute:?}"))?;
                infeasible += 1;
            }
            Err(e) => return Err(format!("scenario {n}: {e}")),
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("reference scenario -> T(3, 11); 100 random scenarios agree ({solved} solved, {infeasible} infeasible)"))
}

fn criterion_9() -> Outcome {
    let mut implies_blind = 0;
    for shape in small_shapes() {
        for alloc in all_allocations(&shape) {
            if let Arrangement::ImpliesBlind(cause) = classify_arrangement(&shape, &alloc).unwrap() {
                let t = coverage_fraction(&shape, &alloc).unwrap();
                check(t >= Rational::new(1, 2), || format!("{shape} {alloc:?} ({cause:?}) covers only {t}"))?;
                implies_blind += 1;
            }
        }
    }
    for a in 2u128..=10 {
        for depth in 1u32..=10 {
            let leaves = a.pow(depth);
            check(2 * leaves * (a - 1) >= a * (leaves - 1), || {
                format!("leaf-majority bound fails at a={a}, K={depth}")
            })?;
            for k in 1..=depth {
                let (strict, weak) = branching_inequalities(a as u64, depth, k);
                check(strict && weak, || format!("branching inequalities fail at a={a}, K={depth}, k={k}"))?;
            }
        }
    }
    Ok(format!("{implies_blind} ImpliesBlind allocations all cover >= 1/2; inequalities hold on a<=10, K<=10"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let samples = 1_000_000;
    let mut agreeing = 0;
    for i in 0..20 {
        let pd = rng.random_range(0.55..0.95);
        let pfa = rng.random_range(0.05..pd - 0.05);
        let profile = SensorProfile::identical(pd, pfa).unwrap();
        let t = rng.random_range(0.0..1.0);
        let strat = FlipStrategy::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)).unwrap();
        let cfg = SimConfig::new(samples, 1000 + i, SimMode::FcView).unwrap();
        let est = simulate_fc_view(t, &profile, &strat, &cfg).unwrap();
        let exact = received_distributions(t, &profile, &strat).unwrap();
        if est.max_z_score(&exact) < 4.0 {
            agreeing += 1;
        }
    }
    check(agreeing >= 19, || format!("only {agreeing}/20 configurations within 4 sigma"))?;

    let profile = reference_profile();
    let strat = FlipStrategy::new(0.9, 0.7).unwrap();
    for (k, a, counts) in
        [(3u32, 2u64, vec![1u64, 0, 0]), (3, 2, vec![0, 1, 2]), (3, 3, vec![1, 1, 2]), (4, 2, vec![0, 1, 1, 3])]
    {
        let shape = TreeShape::new(k, a).unwrap();
        let placement = Placement::spread(&shape, &AttackAllocation::new(counts.clone())).unwrap();
        let rounds = 1_000_000 / shape.total_nodes() as u64;
        let tree = simulate_tree(
            &shape,
            &placement,
            &profile,
            &strat,
            &SimConfig::new(rounds, 77, SimMode::TreePropagation).unwrap(),
        )
        .unwrap();
        check(tree.coverage == coverage_fraction(&shape, &AttackAllocation::new(counts.clone())).unwrap(), || {
            format!("{shape} {counts:?}: measured coverage {}", tree.coverage)
        })?;
        let t = *tree.coverage.numer() as f64 / *tree.coverage.denom() as f64;
        let fc = simulate_fc_view(t, &profile, &strat, &SimConfig::new(tree.pair.trials, 78, SimMode::FcView).unwrap())
            .unwrap();
        let z11 = (tree.pair.pi11_hat - fc.pi11_hat).abs() / tree.pair.std_err11.hypot(fc.std_err11);
        let z10 = (tree.pair.pi10_hat - fc.pi10_hat).abs() / tree.pair.std_err10.hypot(fc.std_err10);
        check(z11 < 4.0 && z10 < 4.0, || format!("{shape} {counts:?}: tree vs FC view z = ({z11:.2}, {z10:.2})"))?;
    }

    let cfg = SimConfig::new(samples, 424242, SimMode::FcView).unwrap();
    let first = simulate_fc_view(0.3, &profile, &strat, &cfg).unwrap();
    let second = simulate_fc_view(0.3, &profile, &strat, &cfg).unwrap();
    check(
        first.pi11_hat.to_bits() == second.pi11_hat.to_bits() && first.pi10_hat.to_bits() == second.pi10_hat.to_bits(),
        || "fixed-seed reruns differ".into(),
    )?;
    Ok(format!("{agreeing}/20 within 4 sigma; tree matches FC view; reruns bit-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("blinding threshold on exhaustive small trees", criterion_1),
        ("strategy grid argmin and minimum at t = 0.4", criterion_2),
        ("D* curve endpoints, monotonicity, convexity", criterion_3),
        ("derivatives vs finite differences and signs", criterion_4),
        ("LLP dynamic program vs exhaustive oracle", criterion_5),
        ("coverage non-decreasing in K at a = 2", criterion_6),
        ("coverage decreasing in a at K = 6", criterion_7),
        ("robust design vs bi-level brute force", criterion_8),
        ("overlap/saturation blinding and integer inequalities", criterion_9),
        ("Monte Carlo agreement and determinism", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS criterion {:>2}: {name} [{detail}] ({:.2?})", i + 1, start.elapsed()),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {name} [{why}] ({:.2?})", i + 1, start.elapsed());
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
