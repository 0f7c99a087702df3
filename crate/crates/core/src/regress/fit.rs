use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::svd_solve;
use crate::model::{canonicalize_component, Factor, FullTensorMap, Predictor, SeparableMap};
use crate::regress::Dataset;

/// Proximal damping of each alternating block solve.
pub const MIN_DAMPING: f64 = 1e-10;

/// Magnitude of the seeded perturbation applied to rank components `q >= 2`.
const INIT_NOISE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub rank: usize,
    pub degree: usize,
    /// L2 penalty on each factor block (and on the tensor for full fits).
    pub ridge: f64,
    pub max_sweeps: usize,
    /// Stop once a sweep improves the loss by less than this fraction.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            rank: 1,
            degree: 3,
            ridge: 0.0,
            max_sweeps: 500,
            rel_tol: 1e-10,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidConfig("rank must be at least 1".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("rel_tol {} must be positive", self.rel_tol)));
        }
        check_ridge(self.ridge)
    }
}

fn check_ridge(ridge: f64) -> Result<()> {
    if ridge.is_finite() && ridge >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("ridge {ridge} must be finite and >= 0")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Mean absolute training error in accuracy points.
    pub train_mae: f64,
    pub sweeps_used: usize,
    pub converged: bool,
    /// Sum of squared residuals on the training data.
    pub final_loss: f64,
    /// Training loss after initialization and after every sweep.
    pub loss_history: Vec<f64>,
}

/// Mean absolute error in accuracy points (fraction * 100).
pub fn mae<P: Predictor + ?Sized>(map: &P, data: &Dataset) -> f64 {
    let total: f64 = data
        .iter()
        .map(|s| (map.predict(&s.point) - s.accuracy).abs())
        .sum();
    100.0 * total / data.len() as f64
}

fn sum_sq<P: Predictor + ?Sized>(map: &P, data: &Dataset) -> f64 {
    data.iter()
        .map(|s| {
            let e = map.predict(&s.point) - s.accuracy;
            e * e
        })
        .sum()
}

fn vandermonde(x: f64, degree: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(degree + 1);
    let mut p = 1.0;
    for _ in 0..=degree {
        row.push(p);
        p *= x;
    }
    row
}

/// Least-squares fit of the unconstrained `(K+1)^3` coefficient tensor.
///
/// `ridge == 0` returns the minimum-norm solution, so underdetermined fits
/// (more monomials than samples) are still well defined.
pub fn fit_full_tensor(data: &Dataset, degree: usize, ridge: f64) -> Result<(FullTensorMap, FitReport)> {
    check_ridge(ridge)?;
    let n = degree + 1;
    let cols = n * n * n;
    let mut a = DMatrix::zeros(data.len(), cols);
    let mut y = DVector::zeros(data.len());
    for (row, s) in data.iter().enumerate() {
        let p = s.point;
        let (vd, vw, vr) = (vandermonde(p.d(), degree), vandermonde(p.w(), degree), vandermonde(p.r(), degree));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    a[(row, (i * n + j) * n + k)] = vd[i] * vw[j] * vr[k];
                }
            }
        }
        y[row] = s.accuracy;
    }
    let theta = svd_solve(&a, &y, ridge);
    if theta.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("full-tensor solution"));
    }
    let map = FullTensorMap::new(degree, theta.iter().copied().collect())?;
    let loss = sum_sq(&map, data);
    let report = FitReport {
        train_mae: mae(&map, data),
        sweeps_used: 1,
        converged: true,
        final_loss: loss,
        loss_history: vec![loss],
    };
    Ok((map, report))
}

/// Per-sample Vandermonde rows for the three coordinates.
struct Design {
    rows: [Vec<Vec<f64>>; 3],
    target: DVector<f64>,
}

impl Design {
    fn new(data: &Dataset, degree: usize) -> Self {
        let build = |axis: usize| {
            data.iter()
                .map(|s| vandermonde(s.point.to_array()[axis], degree))
                .collect::<Vec<_>>()
        };
        Design {
            rows: [build(0), build(1), build(2)],
            target: DVector::from_iterator(data.len(), data.iter().map(|s| s.accuracy)),
        }
    }

    fn len(&self) -> usize {
        self.target.len()
    }
}

/// Factor blocks indexed `[axis][component][power]`.
type Blocks = [Vec<Vec<f64>>; 3];

fn block_values(design: &Design, blocks: &Blocks, axis: usize, n: usize) -> Vec<f64> {
    blocks[axis]
        .iter()
        .map(|c| design.rows[axis][n].iter().zip(c).map(|(x, c)| x * c).sum())
        .collect()
}

fn loss_of(design: &Design, blocks: &Blocks) -> f64 {
    (0..design.len())
        .map(|n| {
            let hd = block_values(design, blocks, 0, n);
            let hw = block_values(design, blocks, 1, n);
            let hr = block_values(design, blocks, 2, n);
            let pred: f64 = (0..hd.len()).map(|q| hd[q] * hw[q] * hr[q]).sum();
            let e = pred - design.target[n];
            e * e
        })
        .sum()
}

/// Re-solves one factor block with the other two held fixed. The residual is
/// linear in the block, so this is a single least-squares problem covering
/// every rank component at once. It minimizes
/// `|A x - y|^2 + ridge |x|^2 + MIN_DAMPING |x - x_prev|^2`: the proximal
/// term keeps rank-deficient designs solvable without biasing the fixed
/// point, and makes the unpenalized loss non-increasing.
#[allow(clippy::needless_range_loop)]
fn update_block(design: &Design, blocks: &mut Blocks, axis: usize, ridge: f64) {
    let rank = blocks[axis].len();
    let width = blocks[axis][0].len();
    let cols = rank * width;
    let rows = design.len();
    let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let prox = MIN_DAMPING.sqrt();
    let mut a = DMatrix::zeros(rows + cols, cols);
    let mut y = DVector::zeros(rows + cols);
    for n in 0..rows {
        let h0 = block_values(design, blocks, others[0], n);
        let h1 = block_values(design, blocks, others[1], n);
        for q in 0..rank {
            let scale = h0[q] * h1[q];
            for (i, x) in design.rows[axis][n].iter().enumerate() {
                a[(n, q * width + i)] = x * scale;
            }
        }
        y[n] = design.target[n];
    }
    for q in 0..rank {
        for i in 0..width {
            let c = q * width + i;
            a[(rows + c, c)] = prox;
            y[rows + c] = prox * blocks[axis][q][i];
        }
    }
    let x = svd_solve(&a, &y, ridge);
    for q in 0..rank {
        for i in 0..width {
            blocks[axis][q][i] = x[q * width + i];
        }
    }
}

fn initial_blocks(design: &Design, config: &FitConfig) -> Blocks {
    let width = config.degree + 1;
    let rank = config.rank;
    let vd = DMatrix::from_fn(design.len(), width, |n, i| design.rows[0][n][i]);
    let s0: Vec<f64> = svd_solve(&vd, &design.target, 0.0)
        .iter()
        .map(|c| c / rank as f64)
        .collect();
    let mut unit = vec![0.0; width];
    unit[0] = 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut blocks: Blocks = [vec![s0; rank], vec![unit.clone(); rank], vec![unit; rank]];
    for block in blocks.iter_mut() {
        for comp in block.iter_mut().skip(1) {
            for c in comp.iter_mut() {
                *c += rng.random_range(-INIT_NOISE..=INIT_NOISE);
            }
        }
    }
    blocks
}

fn into_map(blocks: Blocks, degree: usize) -> Result<SeparableMap> {
    let [s, u, v] = blocks;
    let factors = s
        .into_iter()
        .zip(u)
        .zip(v)
        .map(|((s, u), v)| Factor::new(s, u, v))
        .collect();
    SeparableMap::new(degree, factors)
}

/// Fits the rank-`R` separable predictor by block alternating least squares.
///
/// Initialization: every component starts from the least-squares fit of the
/// accuracies against `d` alone (divided by `R`) with constant-one `u`, `v`;
/// components after the first get seeded uniform noise of magnitude `1e-2`
/// on all three vectors. Each sweep solves the `s`, `u` and `v` blocks in
/// turn, each damped by `1e-10` towards its current value (plus `ridge`
/// towards zero), then rescales to `|u_q| = |v_q| = 1`.
pub fn fit_separable(data: &Dataset, config: &FitConfig) -> Result<(SeparableMap, FitReport)> {
    config.validate()?;
    let design = Design::new(data, config.degree);

    let mut blocks = initial_blocks(&design, config);
    let mut loss = loss_of(&design, &blocks);
    let mut history = vec![loss];
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < config.max_sweeps {
        for axis in 0..3 {
            update_block(&design, &mut blocks, axis, config.ridge);
        }
        canonicalize_blocks(&mut blocks);
        sweeps += 1;

        let next = loss_of(&design, &blocks);
        if !next.is_finite() {
            return Err(Error::NonFinite("alternating least-squares loss"));
        }
        history.push(next);
        let improvement = loss - next;
        loss = next;
        if loss <= f64::MIN_POSITIVE || improvement <= config.rel_tol * history[history.len() - 2] {
            converged = true;
            break;
        }
    }

    let map = into_map(blocks, config.degree)?;
    let report = FitReport {
        train_mae: mae(&map, data),
        sweeps_used: sweeps,
        converged,
        final_loss: loss,
        loss_history: history,
    };
    Ok((map, report))
}

fn canonicalize_blocks(blocks: &mut Blocks) {
    let [s, u, v] = blocks;
    for q in 0..s.len() {
        canonicalize_component(&mut s[q], &mut u[q], &mut v[q]);
    }
}
