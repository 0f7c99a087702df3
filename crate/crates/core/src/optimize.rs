//! Maximizing a predictor over the cost surface `d * w^2 * r^2 = T`.
//!
//! The equality constraint is eliminated with `d = T / (w^2 r^2)`, leaving a
//! two-dimensional search over `(w, r)` restricted to `w^2 r^2 >= T` (so that
//! `d <= 1`). Working in `(ln w, ln r)` turns the feasible region into the
//! triangle `ln w <= 0, ln r <= 0, ln w + ln r >= ln sqrt(T)`.
//!
//! [`solve`] scans a log-uniform grid, refines the best cell with a projected
//! Nelder-Mead simplex and also tries the three single-dimension corners.
//! [`brute_force`] is the plain grid scan and serves as its oracle.
//! Stationarity of the Lagrangian is reported through [`kkt_residual`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cost, DimTriple, Predictor};
use crate::par::{map_range, Execution};

/// Coordinates within this distance of 1 count as pinned to the upper bound.
pub const ACTIVE_TOL: f64 = 1e-9;

/// Relative objective difference below which two candidates are tied.
const TIE_TOL: f64 = 1e-12;

/// Simplex refinement stops once its diameter drops below this (log units).
const STEP_TOL: f64 = 1e-9;

const MAX_SIMPLEX_ITERS: usize = 10_000;

/// Fraction of the base model's cost the pruned model may use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Budget(f64);

impl Budget {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 && t < 1.0 {
            Ok(Budget(t))
        } else {
            Err(Error::InvalidBudget(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Lower end of the feasible range for `w` and `r`.
    fn sqrt(self) -> f64 {
        self.0.sqrt()
    }
}

impl TryFrom<f64> for Budget {
    type Error = Error;

    fn try_from(t: f64) -> Result<Self> {
        Budget::new(t)
    }
}

impl From<Budget> for f64 {
    fn from(b: Budget) -> f64 {
        b.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub grid_resolution: usize,
    pub refine: bool,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grid_resolution: 512,
            refine: true,
            execution: Execution::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub point: DimTriple,
    pub predicted_accuracy: f64,
    pub lagrange_multiplier: f64,
    /// Constraint row `d w^2 r^2 - T`, then the `d`, `w`, `r` stationarity rows.
    pub kkt_residuals: [f64; 4],
    /// Whether `d`, `w`, `r` sit on their upper bound of 1.
    pub active_bounds: [bool; 3],
    /// Returned objective minus the best grid objective.
    pub objective_gap_vs_grid: f64,
}

impl PlanResult {
    pub fn is_interior(&self) -> bool {
        self.active_bounds.iter().all(|a| !a)
    }

    pub fn max_stationarity_residual(&self) -> f64 {
        self.kkt_residuals[1..].iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Largest stationarity row over coordinates not held at their bound,
    /// the only rows expected to vanish at a boundary optimum.
    pub fn max_free_residual(&self) -> f64 {
        self.kkt_residuals[1..]
            .iter()
            .zip(self.active_bounds)
            .filter(|(_, active)| !active)
            .fold(0.0, |m, (r, _)| m.max(r.abs()))
    }
}

/// Gradient of the cost `d w^2 r^2`.
fn cost_gradient(d: f64, w: f64, r: f64) -> [f64; 3] {
    [w * w * r * r, 2.0 * d * w * r * r, 2.0 * d * w * w * r]
}

/// Left-hand sides of the Lagrange system at `p` for multiplier `lambda`:
/// `[C - T, dF/dd + lambda dC/dd, dF/dw + lambda dC/dw, dF/dr + lambda dC/dr]`.
pub fn kkt_residual<P: Predictor + ?Sized>(map: &P, p: &DimTriple, lambda: f64, budget: Budget) -> [f64; 4] {
    let (d, w, r) = (p.d(), p.w(), p.r());
    let g = map.gradient(d, w, r);
    let c = cost_gradient(d, w, r);
    [
        cost(p) - budget.value(),
        g[0] + lambda * c[0],
        g[1] + lambda * c[1],
        g[2] + lambda * c[2],
    ]
}

pub fn active_bounds(p: &DimTriple) -> [bool; 3] {
    p.to_array().map(|x| x >= 1.0 - ACTIVE_TOL)
}

/// Least-squares multiplier over the stationarity rows of the coordinates
/// not pinned at 1. Falls back to all three rows if every coordinate is pinned.
pub fn estimate_multiplier<P: Predictor + ?Sized>(map: &P, p: &DimTriple) -> f64 {
    let (d, w, r) = (p.d(), p.w(), p.r());
    let g = map.gradient(d, w, r);
    let c = cost_gradient(d, w, r);
    let active = active_bounds(p);
    let free: Vec<usize> = (0..3).filter(|&i| !active[i]).collect();
    let rows: Vec<usize> = if free.is_empty() { vec![0, 1, 2] } else { free };
    let num: f64 = rows.iter().map(|&i| g[i] * c[i]).sum();
    let den: f64 = rows.iter().map(|&i| c[i] * c[i]).sum();
    -num / den
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    d: f64,
    w: f64,
    r: f64,
    value: f64,
}

impl Candidate {
    fn at<P: Predictor + ?Sized>(map: &P, budget: Budget, w: f64, r: f64) -> Self {
        let d = (budget.value() / (w * w * r * r)).min(1.0);
        Self::exact(map, d, w, r)
    }

    fn exact<P: Predictor + ?Sized>(map: &P, d: f64, w: f64, r: f64) -> Self {
        let v = map.value(d, w, r);
        Candidate {
            d,
            w,
            r,
            value: if v.is_nan() { f64::NEG_INFINITY } else { v },
        }
    }

    /// Strictly better objective, or a tie broken towards the
    /// lexicographically greatest `(d, w, r)`.
    fn beats(&self, other: &Candidate) -> bool {
        let scale = self.value.abs().max(other.value.abs());
        let diff = self.value - other.value;
        if diff.is_nan() {
            // Both infinite with the same sign.
            return self.lex_greater(other);
        }
        if diff.abs() <= TIE_TOL * scale {
            self.lex_greater(other)
        } else {
            diff > 0.0
        }
    }

    fn lex_greater(&self, other: &Candidate) -> bool {
        (self.d, self.w, self.r) > (other.d, other.w, other.r)
    }
}

fn best_of(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    cands.into_iter().fold(None, |best, c| match best {
        Some(b) if !c.beats(&b) => Some(b),
        _ => Some(c),
    })
}

/// Log-uniform nodes from `sqrt(T)` to exactly 1.
fn grid_nodes(budget: Budget, n: usize) -> Vec<f64> {
    let lo = budget.sqrt().ln();
    (0..n)
        .map(|i| {
            if i == 0 {
                budget.sqrt()
            } else if i == n - 1 {
                1.0
            } else {
                (lo * (n - 1 - i) as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Best feasible grid node. Node `(i, j)` is feasible iff `i + j >= n - 1`.
/// Rows are scanned in parallel and reduced in index order, so the result is
/// the same under every execution policy.
fn grid_best<P: Predictor + ?Sized>(map: &P, budget: Budget, n: usize, exec: Execution) -> (Candidate, usize, usize) {
    let nodes = grid_nodes(budget, n);
    let rows = map_range(exec, n, |i| {
        let mut best: Option<(Candidate, usize)> = None;
        for j in (n - 1 - i)..n {
            let c = Candidate::at(map, budget, nodes[i], nodes[j]);
            if best.as_ref().is_none_or(|(b, _)| c.beats(b)) {
                best = Some((c, j));
            }
        }
        best.map(|(c, j)| (c, i, j)).expect("every row has a feasible node")
    });
    rows.into_iter()
        .reduce(|best, row| if row.0.beats(&best.0) { row } else { best })
        .expect("grid is non-empty")
}

/// Euclidean projection onto the triangle `a <= 0, b <= 0, a + b >= floor`.
fn project(a: f64, b: f64, floor: f64) -> (f64, f64) {
    if a <= 0.0 && b <= 0.0 && a + b >= floor {
        return (a, b);
    }
    let segments = [
        ((floor, 0.0), (0.0, 0.0)),   // b = 0
        ((0.0, floor), (0.0, 0.0)),   // a = 0
        ((floor, 0.0), (0.0, floor)), // a + b = floor
    ];
    let mut best = (0.0, 0.0);
    let mut best_dist = f64::INFINITY;
    for ((x0, y0), (x1, y1)) in segments {
        let (dx, dy) = (x1 - x0, y1 - y0);
        let t = (((a - x0) * dx + (b - y0) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
        let (px, py) = (x0 + t * dx, y0 + t * dy);
        let dist = (px - a).powi(2) + (py - b).powi(2);
        if dist < best_dist {
            best_dist = dist;
            best = (px, py);
        }
    }
    best
}

/// Projected Nelder-Mead on `(ln w, ln r)`, maximizing the reduced objective.
fn simplex_refine<P: Predictor + ?Sized>(map: &P, budget: Budget, start: (f64, f64), step: f64) -> Candidate {
    let floor = budget.sqrt().ln();
    let eval = |a: f64, b: f64| -> (f64, f64, f64) {
        let (a, b) = project(a, b, floor);
        let c = Candidate::at(map, budget, a.exp(), b.exp());
        (a, b, -c.value)
    };

    let mut simplex = [
        eval(start.0, start.1),
        eval(start.0 + step, start.1),
        eval(start.0, start.1 + step),
    ];
    for _ in 0..MAX_SIMPLEX_ITERS {
        simplex.sort_by(|x, y| x.2.total_cmp(&y.2));
        let diameter = simplex[1..]
            .iter()
            .map(|v| (v.0 - simplex[0].0).hypot(v.1 - simplex[0].1))
            .fold(0.0, f64::max);
        if diameter < STEP_TOL {
            break;
        }
        let (best, mid, worst) = (simplex[0], simplex[1], simplex[2]);
        let centroid = (0.5 * (best.0 + mid.0), 0.5 * (best.1 + mid.1));
        let along = |t: f64| eval(centroid.0 + t * (worst.0 - centroid.0), centroid.1 + t * (worst.1 - centroid.1));

        let reflected = along(-1.0);
        if reflected.2 < best.2 {
            let expanded = along(-2.0);
            simplex[2] = if expanded.2 < reflected.2 { expanded } else { reflected };
        } else if reflected.2 < mid.2 {
            simplex[2] = reflected;
        } else {
            let contracted = if reflected.2 < worst.2 { along(-0.5) } else { along(0.5) };
            if contracted.2 < worst.2.min(reflected.2) {
                simplex[2] = contracted;
            } else {
                for v in simplex.iter_mut().skip(1) {
                    *v = eval(best.0 + 0.5 * (v.0 - best.0), best.1 + 0.5 * (v.1 - best.1));
                }
            }
        }
    }
    simplex.sort_by(|x, y| x.2.total_cmp(&y.2));
    let (a, b, _) = simplex[0];
    Candidate::at(map, budget, a.exp(), b.exp())
}

fn corners<P: Predictor + ?Sized>(map: &P, budget: Budget) -> [Candidate; 3] {
    let t = budget.value();
    let s = budget.sqrt();
    [
        Candidate::exact(map, t, 1.0, 1.0),
        Candidate::exact(map, 1.0, s, 1.0),
        Candidate::exact(map, 1.0, 1.0, s),
    ]
}

fn finish<P: Predictor + ?Sized>(map: &P, budget: Budget, chosen: Candidate, grid_value: f64) -> Result<PlanResult> {
    let point = DimTriple::new(chosen.d, chosen.w, chosen.r)?;
    let lambda = estimate_multiplier(map, &point);
    Ok(PlanResult {
        point,
        predicted_accuracy: chosen.value,
        lagrange_multiplier: lambda,
        kkt_residuals: kkt_residual(map, &point, lambda, budget),
        active_bounds: active_bounds(&point),
        objective_gap_vs_grid: chosen.value - grid_value,
    })
}

/// Maximizes `map` subject to `cost = T` and `0 < d, w, r <= 1`.
pub fn solve<P: Predictor + ?Sized>(map: &P, budget: Budget, options: &SolveOptions) -> Result<PlanResult> {
    let n = options.grid_resolution;
    if n < 16 {
        return Err(Error::InvalidConfig(format!("grid resolution {n} is below 16")));
    }
    let (grid, i, j) = grid_best(map, budget, n, options.execution);
    let mut pool = vec![grid];
    pool.extend(corners(map, budget));
    if options.refine {
        let step = -budget.sqrt().ln() / (n - 1) as f64;
        let mut start = (grid.w.ln(), grid.r.ln());
        debug_assert!(i + j >= n - 1);
        // Restart until a fresh simplex no longer improves on the last one.
        let mut incumbent = grid;
        for _ in 0..4 {
            let refined = simplex_refine(map, budget, start, step);
            pool.push(refined);
            if !refined.beats(&incumbent) {
                break;
            }
            incumbent = refined;
            start = (refined.w.ln(), refined.r.ln());
        }
    }
    let chosen = best_of(pool).expect("candidate pool is non-empty");
    finish(map, budget, chosen, grid.value)
}

/// Exhaustive scan of the `resolution x resolution` grid, no refinement.
pub fn brute_force<P: Predictor + ?Sized>(map: &P, budget: Budget, resolution: usize, exec: Execution) -> Result<PlanResult> {
    if resolution < 64 {
        return Err(Error::InvalidConfig(format!("brute-force resolution {resolution} is below 64")));
    }
    let (grid, _, _) = grid_best(map, budget, resolution, exec);
    finish(map, budget, grid, grid.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Factor, SeparableMap};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rank_one(s: &[f64], u: &[f64], v: &[f64]) -> SeparableMap {
        SeparableMap::new(s.len() - 1, vec![Factor::new(s.to_vec(), u.to_vec(), v.to_vec())]).unwrap()
    }

    /// Nondecreasing cubic on (0, 1]: nonnegative coefficients.
    fn random_increasing(rng: &mut ChaCha8Rng) -> SeparableMap {
        let mut poly = || {
            let mut c: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            c[0] += 0.2;
            c
        };
        rank_one(&poly(), &poly(), &poly())
    }

    /// Concave-ish cubic with a positive slope at the origin.
    fn random_smooth(rng: &mut ChaCha8Rng) -> SeparableMap {
        let mut poly = || {
            vec![
                rng.random_range(0.3..0.6),
                rng.random_range(0.5..1.5),
                rng.random_range(-0.9..-0.2),
                rng.random_range(-0.1..0.2),
            ]
        };
        rank_one(&poly(), &poly(), &poly())
    }

    fn half() -> Budget {
        Budget::new(0.5).unwrap()
    }

    #[test]
    fn budget_domain() {
        for t in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(Budget::new(t).is_err());
        }
        assert!(serde_json::from_str::<Budget>("0.5").is_ok());
        assert!(serde_json::from_str::<Budget>("1.0").is_err());
    }

    #[test]
    fn resolution_floors() {
        let map = SeparableMap::constant(0.9, 1);
        let opts = SolveOptions { grid_resolution: 15, ..SolveOptions::default() };
        assert!(solve(&map, half(), &opts).is_err());
        assert!(brute_force(&map, half(), 63, Execution::Auto).is_err());
    }

    #[test]
    fn product_map_optimum_is_on_the_boundary_curve() {
        // F = d w r reduces to T / (w r) on the constraint, maximized where
        // w r is smallest: d = 1, w r = sqrt(T). The tie-break then picks w = 1.
        let map = rank_one(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]);
        let res = solve(&map, half(), &SolveOptions::default()).unwrap();
        let s = 0.5f64.sqrt();
        assert_eq!(res.point.to_array(), [1.0, 1.0, s]);
        assert!((res.predicted_accuracy - s).abs() < 1e-12);

        let brute = brute_force(&map, half(), 512, Execution::Auto).unwrap();
        assert!((brute.predicted_accuracy - s).abs() < 1e-3);
    }

    #[test]
    fn depth_penalized_map_prefers_full_width_and_resolution() {
        // F = (2 - d) w r reduces to 2t - T/t with t = w r, increasing in t.
        let map = rank_one(&[2.0, -1.0], &[0.0, 1.0], &[0.0, 1.0]);
        let res = solve(&map, half(), &SolveOptions::default()).unwrap();
        assert_eq!(res.point.to_array(), [0.5, 1.0, 1.0]);
        assert!((res.predicted_accuracy - 1.5).abs() < 1e-12);
        assert_eq!(res.active_bounds, [false, true, true]);
    }

    #[test]
    fn constant_map_takes_tie_break() {
        let map = SeparableMap::constant(0.9, 3);
        for t in [0.25, 0.5, 0.75] {
            let b = Budget::new(t).unwrap();
            let res = solve(&map, b, &SolveOptions::default()).unwrap();
            assert_eq!(res.point.to_array(), [1.0, 1.0, t.sqrt()]);
            assert_eq!(res.predicted_accuracy, 0.9);
            let brute = brute_force(&map, b, 64, Execution::Auto).unwrap();
            assert_eq!(brute.predicted_accuracy, 0.9);
        }
    }

    #[test]
    fn kkt_rows_at_depth_only_point() {
        let map = rank_one(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]);
        let p = DimTriple::new(0.5, 1.0, 1.0).unwrap();
        let lambda = estimate_multiplier(&map, &p);
        assert!((lambda + 1.0).abs() < 1e-15);
        let rows = kkt_residual(&map, &p, lambda, half());
        assert_eq!(rows[0], 0.0);
        assert!(rows[1].abs() < 1e-15);
        assert!((rows[2] + 0.5).abs() < 1e-15 && (rows[3] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_residual_skips_active_rows() {
        let map = rank_one(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]);
        let res = solve(&map, half(), &SolveOptions::default()).unwrap();
        assert_eq!(res.active_bounds, [true, true, false]);
        assert!(res.max_stationarity_residual() > 0.1);
        assert!(res.max_free_residual() <= 1e-6, "{:?}", res.kkt_residuals);
    }

    #[test]
    fn constraint_row_vanishes_on_the_surface() {
        let map = SeparableMap::constant(0.5, 2);
        let p = DimTriple::new(0.5, 1.0, 1.0).unwrap();
        assert_eq!(kkt_residual(&map, &p, 3.0, half())[0], 0.0);
    }

    #[test]
    fn interior_optimum_satisfies_stationarity() {
        let map = rank_one(&[0.70, 0.50, -0.38, 0.12], &[0.40, 1.20, -0.75, 0.15], &[0.35, 1.30, -0.75, 0.10]);
        let res = solve(&map, half(), &SolveOptions::default()).unwrap();
        assert!(res.is_interior(), "{res:?}");
        assert!(res.max_stationarity_residual() <= 1e-6, "{res:?}");
        assert!((cost(&res.point) - 0.5).abs() <= 1e-6);
        assert!(res.objective_gap_vs_grid >= 0.0);

        // Brute force lands near it with a small but nonzero gradient residual.
        let brute = brute_force(&map, half(), 1024, Execution::Auto).unwrap();
        assert!(brute.point.linf_distance(&res.point) < 5e-3);
        assert!(brute.max_stationarity_residual() <= 1e-2);
    }

    #[test]
    fn grid_resolution_sanity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let map = random_smooth(&mut rng);
            let coarse = brute_force(&map, half(), 64, Execution::Auto).unwrap();
            let fine = brute_force(&map, half(), 4096, Execution::Auto).unwrap();
            assert!((coarse.predicted_accuracy - fine.predicted_accuracy).abs() < 1e-2);
        }
    }

    #[test]
    fn execution_policy_does_not_change_results() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let map = random_smooth(&mut rng);
        let seq = SolveOptions { execution: Execution::Sequential, ..SolveOptions::default() };
        let par = SolveOptions { execution: Execution::Parallel, ..SolveOptions::default() };
        assert_eq!(solve(&map, half(), &seq).unwrap(), solve(&map, half(), &par).unwrap());
    }

    #[test]
    fn projection_lands_in_triangle() {
        let floor = 0.25f64.sqrt().ln();
        for (a, b) in [(0.3, 0.3), (-2.0, -2.0), (0.1, -3.0), (-0.2, -0.1), (floor, 0.5)] {
            let (pa, pb) = project(a, b, floor);
            assert!(pa <= 0.0 && pb <= 0.0 && pa + pb >= floor - 1e-15, "({a},{b}) -> ({pa},{pb})");
        }
        assert_eq!(project(-0.1, -0.1, floor), (-0.1, -0.1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn refinement_never_loses_to_the_grid(seed in any::<u64>(), t in 0.1..0.9f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_smooth(&mut rng);
            let b = Budget::new(t).unwrap();
            let res = solve(&map, b, &SolveOptions::default()).unwrap();
            let brute = brute_force(&map, b, 512, Execution::Auto).unwrap();
            prop_assert!(res.predicted_accuracy >= brute.predicted_accuracy - 1e-9);
            prop_assert!((cost(&res.point) - t).abs() <= 1e-6);
            prop_assert_eq!(res.kkt_residuals[0], cost(&res.point) - t);
            if res.is_interior() {
                prop_assert!(res.max_stationarity_residual() <= 1e-6, "{:?}", res);
            }
        }

        #[test]
        fn optimum_grows_with_budget(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_increasing(&mut rng);
            let mut last = f64::NEG_INFINITY;
            for step in 1..10 {
                let b = Budget::new(step as f64 / 10.0).unwrap();
                let res = solve(&map, b, &SolveOptions::default()).unwrap();
                prop_assert!(res.predicted_accuracy >= last - 1e-12);
                last = res.predicted_accuracy;
            }
        }

        #[test]
        fn argmax_ignores_positive_scaling(seed in any::<u64>(), power in -2i32..3, shift in -0.5..0.5f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_smooth(&mut rng);
            let a = 2f64.powi(power);
            let f = &map.factors()[0];
            let scaled = rank_one(&f.s.iter().map(|c| c * a).collect::<Vec<_>>(), &f.u, &f.v);
            let base = solve(&map, half(), &SolveOptions::default()).unwrap();
            let res = solve(&scaled, half(), &SolveOptions::default()).unwrap();
            // Power-of-two scaling is exact, so every comparison is unchanged.
            prop_assert_eq!(base.point, res.point);

            let mut unit = vec![0.0; 4];
            unit[0] = 1.0;
            let mut constant = unit.clone();
            constant[0] = shift;
            let shifted = SeparableMap::new(3, vec![
                Factor::new(f.s.iter().map(|c| c * a).collect(), f.u.clone(), f.v.clone()),
                Factor::new(constant, unit.clone(), unit),
            ]).unwrap();
            let res = solve(&shifted, half(), &SolveOptions::default()).unwrap();
            prop_assert!(base.point.linf_distance(&res.point) < 1e-4, "{:?} vs {:?}", base.point, res.point);
        }
    }
}
