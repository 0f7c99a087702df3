//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use prune_planner::collect::{budget_floors, collect, make_schedule, CollectConfig, Dimension, SimulatedTrainer};
use prune_planner::fixtures::{self, Architecture, Subtable};
use prune_planner::model::{cost, Factor, Predictor, SeparableMap};
use prune_planner::optimize::{brute_force, solve, Budget, PlanResult, SolveOptions};
use prune_planner::par::Execution;
use prune_planner::regress::separability::Axis;
use prune_planner::regress::{analyze_separability, fit_full_tensor, fit_separable, mae, FitConfig, Thresholds};
use prune_planner::{DimTriple, Map};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < limit, || format!("took {spent:.2?}, limit {limit:?}"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fmt_point(p: &DimTriple) -> String {
    format!("({:.3}, {:.3}, {:.3})", p.d(), p.w(), p.r())
}

fn half() -> Budget {
    Budget::new(0.5).unwrap()
}

fn overfitting() -> Check {
    let start = Instant::now();
    let data = fixtures::merged(Architecture::ResNet);
    let mut points: Vec<[f64; 3]> = data.iter().map(|s| s.point.to_array()).collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    ensure(points.len() >= 45, || format!("only {} distinct points", points.len()))?;

    let (mut sep, mut full, mut wins) = (Vec::new(), Vec::new(), 0);
    for seed in 0..50u64 {
        let (train, eval) = data.split(13, seed).map_err(|e| e.to_string())?;
        let config = FitConfig { degree: 5, seed, ..FitConfig::default() };
        let (s, _) = fit_separable(&train, &config).map_err(|e| e.to_string())?;
        let (f, _) = fit_full_tensor(&train, 5, 0.0).map_err(|e| e.to_string())?;
        let (es, ef) = (mae(&s, &eval), mae(&f, &eval));
        wins += usize::from(es < ef);
        sep.push(es);
        full.push(ef);
    }
    let (ms, mf) = (median(sep), median(full));
    ensure(ms < mf, || format!("median eval MAE separable {ms:.3} >= full {mf:.3}"))?;
    ensure(wins >= 40, || format!("separable better in only {wins}/50 splits"))?;
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("median eval MAE {ms:.2} vs {mf:.2} points, separable better in {wins}/50 splits"))
}

fn fit_quality() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for arch in Architecture::ALL {
        let (_, report) = fit_separable(&fixtures::merged(arch), &FitConfig::default()).map_err(|e| e.to_string())?;
        ensure(report.train_mae <= 1.0, || format!("{} train MAE {:.3}", arch.name(), report.train_mae))?;
        parts.push(format!("{} {:.3}", arch.name(), report.train_mae));
    }
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("rank-1 K=3 train MAE: {} points", parts.join(", ")))
}

/// Rank-1 cubic whose factors stay positive on [0, 1] and rise from the
/// origin.
fn random_map(rng: &mut ChaCha8Rng) -> SeparableMap {
    let mut poly = || loop {
        let c = vec![
            rng.random_range(0.2..0.6),
            rng.random_range(0.3..1.5),
            rng.random_range(-0.9..0.3),
            rng.random_range(-0.3..0.3),
        ];
        let positive = (0..=100).all(|i| {
            let x = i as f64 / 100.0;
            c[0] + x * (c[1] + x * (c[2] + x * c[3])) > 0.05
        });
        if positive {
            return c;
        }
    };
    SeparableMap::new(3, vec![Factor::new(poly(), poly(), poly())]).unwrap()
}

const BUDGETS: [f64; 3] = [0.25, 0.5, 0.75];

fn random_plans() -> Result<Vec<(PlanResult, f64)>, String> {
    let mut out = Vec::new();
    for seed in 0..20u64 {
        let map = random_map(&mut ChaCha8Rng::seed_from_u64(seed));
        for t in BUDGETS {
            let b = Budget::new(t).unwrap();
            let plan = solve(&map, b, &SolveOptions::default()).map_err(|e| e.to_string())?;
            out.push((plan, t));
        }
    }
    Ok(out)
}

fn optimizer_vs_oracle() -> Check {
    let start = Instant::now();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_cost = 0.0f64;
    for seed in 0..20u64 {
        let map = random_map(&mut ChaCha8Rng::seed_from_u64(seed));
        for t in BUDGETS {
            let b = Budget::new(t).unwrap();
            let plan = solve(&map, b, &SolveOptions::default()).map_err(|e| e.to_string())?;
            let brute = brute_force(&map, b, 2048, Execution::Auto).map_err(|e| e.to_string())?;
            let gap = brute.predicted_accuracy - plan.predicted_accuracy;
            let cost_err = (cost(&plan.point) - t).abs();
            ensure(gap <= 1e-4, || format!("seed {seed}, T={t}: brute force ahead by {gap:e}"))?;
            ensure(cost_err <= 1e-6, || format!("seed {seed}, T={t}: |cost - T| = {cost_err:e}"))?;
            worst_gap = worst_gap.max(gap);
            worst_cost = worst_cost.max(cost_err);
        }
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!("60 cases, brute(2048) - solve <= {worst_gap:.1e}, max |cost - T| {worst_cost:.1e}"))
}

fn fixture_optimum(config: &FitConfig) -> Result<DimTriple, String> {
    let (map, _) = fit_separable(&fixtures::merged(Architecture::ResNet), config).map_err(|e| e.to_string())?;
    Ok(solve(&map, half(), &SolveOptions::default()).map_err(|e| e.to_string())?.point)
}

fn degree_robustness() -> Check {
    let by_degree: Vec<(usize, DimTriple)> = [3, 4, 5]
        .into_iter()
        .map(|k| fixture_optimum(&FitConfig { degree: k, ..FitConfig::default() }).map(|p| (k, p)))
        .collect::<Result<_, _>>()?;
    for (i, (ka, pa)) in by_degree.iter().enumerate() {
        for (kb, pb) in &by_degree[i + 1..] {
            let dist = pa.linf_distance(pb);
            ensure(dist <= 0.05, || format!("K={ka} {} vs K={kb} {}: {dist:.4}", fmt_point(pa), fmt_point(pb)))?;
        }
    }
    let r1 = by_degree[0].1;
    let mut ranks = Vec::new();
    for rank in [2, 3] {
        let p = fixture_optimum(&FitConfig { rank, ..FitConfig::default() })?;
        let dist = p.linf_distance(&r1);
        ensure(dist <= 0.05, || format!("R={rank} {} vs R=1 {}: {dist:.4}", fmt_point(&p), fmt_point(&r1)))?;
        ranks.push(format!("R={rank} {}", fmt_point(&p)));
    }
    let degrees: Vec<String> = by_degree.iter().map(|(k, p)| format!("K={k} {}", fmt_point(p))).collect();
    Ok(format!(
        "T=0.5 optima {}; {}",
        degrees.join(", "),
        ranks.join(", ")
    ))
}

fn kkt() -> Check {
    let plans = random_plans()?;
    let mut interior = 0;
    let mut worst = 0.0f64;
    for (i, (plan, t)) in plans.iter().enumerate() {
        if !plan.is_interior() {
            continue;
        }
        interior += 1;
        let res = plan.max_stationarity_residual();
        ensure(res <= 1e-6, || format!("case {i} (T={t}) at {}: residual {res:e}", fmt_point(&plan.point)))?;
        worst = worst.max(res);
    }
    ensure(interior > 0, || "no interior optimum among the random maps".into())?;
    Ok(format!("{interior}/{} optima interior, max stationarity residual {worst:.1e}", plans.len()))
}

fn schedule_exactness() -> Check {
    let (d, w, r) = budget_floors(half(), &DimTriple::BASE);
    let root = 0.5f64.sqrt();
    for (got, want) in [(d, 0.5), (w, root), (r, root)] {
        ensure((got - want).abs() <= 1e-12, || format!("floor {got} vs {want}"))?;
    }
    let depth = make_schedule(Dimension::Depth, 1.0, d, 4).map_err(|e| e.to_string())?;
    for (got, want) in depth.targets.iter().zip([0.875, 0.75, 0.625, 0.5]) {
        ensure((got - want).abs() <= 1e-12, || format!("depth schedule {:?}", depth.targets))?;
    }
    let truth = fixtures::truth_map().map_err(|e| e.to_string())?;
    let mut trainer = SimulatedTrainer::new(truth, 0.003, 0.0, 0).map_err(|e| e.to_string())?;
    let config = CollectConfig::new(half(), 4, 0.94);
    let outcome = collect(&mut trainer, &config, &[], None).map_err(|e| e.to_string())?;
    ensure(outcome.dataset.len() == 13, || format!("{} samples", outcome.dataset.len()))?;
    Ok(format!("depth targets {:?}, floors (0.5, {root:.6}, {root:.6}), 13 samples", depth.targets))
}

fn closed_loop() -> Check {
    let start = Instant::now();
    let truth = fixtures::truth_map().map_err(|e| e.to_string())?;
    let best = brute_force(&truth, half(), 2048, Execution::Auto).map_err(|e| e.to_string())?;
    let config = CollectConfig::new(half(), 4, truth.value(1.0, 1.0, 1.0));
    let mut passes = 0;
    let mut gaps = Vec::new();
    for seed in 0..10u64 {
        let mut trainer = SimulatedTrainer::new(truth.clone(), 0.003, 0.0, seed).map_err(|e| e.to_string())?;
        let outcome = collect(&mut trainer, &config, &[], None).map_err(|e| e.to_string())?;
        let fit_config = FitConfig { seed, ..FitConfig::default() };
        let (map, _) = fit_separable(&outcome.dataset, &fit_config).map_err(|e| e.to_string())?;
        let plan = solve(&Map::from(map), half(), &SolveOptions::default()).map_err(|e| e.to_string())?;
        let gap = 100.0 * (best.predicted_accuracy - truth.predict(&plan.point));
        passes += usize::from(gap <= 0.5);
        gaps.push(gap);
    }
    ensure(passes >= 9, || format!("{passes}/10 seeds within 0.5 points, gaps {gaps:.3?}"))?;
    within_time(start, Duration::from_secs(10))?;
    let worst = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "{passes}/10 seeds within 0.5 points of true optimum {:.4} at {}, worst gap {worst:.3}",
        best.predicted_accuracy,
        fmt_point(&best.point)
    ))
}

fn separability() -> Check {
    let thresholds = Thresholds::default();
    let mut parts = Vec::new();
    for arch in Architecture::ALL {
        let report = analyze_separability(&fixtures::merged(arch)).map_err(|e| e.to_string())?;
        ensure(report.passes(&thresholds), || {
            format!(
                "{}: median {:.3}%, max {:.3}%",
                arch.name(),
                100.0 * report.median_rel_dev,
                100.0 * report.max_rel_dev
            )
        })?;
        parts.push(format!(
            "{} median {:.2}% max {:.2}%",
            arch.name(),
            100.0 * report.median_rel_dev,
            100.0 * report.max_rel_dev
        ));
    }
    let table = analyze_separability(&fixtures::subtable(Architecture::ResNet, Subtable::DepthResolution))
        .map_err(|e| e.to_string())?;
    let dev = table
        .slice(Axis::W, 1.0)
        .and_then(|s| s.cross_deviation([1.0, 0.55], [1.0, 0.5]))
        .ok_or("no (d 1.00/0.55, r 1.00/0.50) block in the depth-resolution table")?;
    ensure((100.0 * dev - 0.21).abs() <= 0.02, || format!("pair deviation {:.4}%", 100.0 * dev))?;
    Ok(format!("{}; depth pair 1.00/0.55 at r 1.00 vs 0.50: {:.4}%", parts.join(", "), 100.0 * dev))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("overfitting: separable K=5 beats full tensor K=5 on held-out data", overfitting),
        ("rank-1 K=3 fit quality on both fixtures", fit_quality),
        ("optimizer vs brute force on random maps", optimizer_vs_oracle),
        ("degree and rank robustness of the optimum", degree_robustness),
        ("stationarity at interior optima", kkt),
        ("schedule, floors and sample count", schedule_exactness),
        ("closed loop on a known surface", closed_loop),
        ("separability of the measured tables", separability),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS [{secs:.2}s] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL [{secs:.2}s] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
