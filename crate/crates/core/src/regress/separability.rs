//! Cross-ratio check of the rank-1 hypothesis on axis-aligned grids.
//!
//! If accuracy factors as `f(x) g(y)` on a slice with the third coordinate
//! held fixed, then `F(x1, y) / F(x2, y)` does not depend on `y`. For every
//! pair of rows (and of columns) in every slice, the ratios across the other
//! coordinate are compared against their mean; small relative deviations
//! support a separable predictor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regress::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    D,
    W,
    R,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::D, Axis::W, Axis::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::D => "d",
            Axis::W => "w",
            Axis::R => "r",
        }
    }
}

/// Ratios `F(first, y) / F(second, y)` along `axis` over the shared `y` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStat {
    pub axis: Axis,
    pub first: f64,
    pub second: f64,
    pub across: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `|ratio - mean| / mean` for each entry of `ratios`.
    pub rel_devs: Vec<f64>,
}

/// Disagreement of the two ratios in one 2x2 sub-grid:
/// `|rho1 - rho2| / mean(rho1, rho2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossStat {
    pub rows: [f64; 2],
    pub cols: [f64; 2],
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub fixed_axis: Axis,
    pub fixed_value: f64,
    pub row_axis: Axis,
    pub col_axis: Axis,
    pub pairs: Vec<PairStat>,
    pub cross: Vec<CrossStat>,
    pub max_rel_dev: f64,
    pub median_rel_dev: f64,
}

impl Slice {
    /// Cross-ratio deviation of the 2x2 sub-grid spanned by two row values
    /// and two column values, in either order.
    pub fn cross_deviation(&self, rows: [f64; 2], cols: [f64; 2]) -> Option<f64> {
        let same = |a: [f64; 2], b: [f64; 2]| (a == b) || (a[0] == b[1] && a[1] == b[0]);
        self.cross
            .iter()
            .find(|c| same(c.rows, rows) && same(c.cols, cols))
            .map(|c| c.rel_dev)
    }
}

/// Where the largest deviation was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worst {
    pub fixed_axis: Axis,
    pub fixed_value: f64,
    pub pair_axis: Axis,
    pub pair: [f64; 2],
    pub at: f64,
    pub rel_dev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_median: f64,
    pub max_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            max_median: 0.01,
            max_max: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub slices: Vec<Slice>,
    pub max_rel_dev: f64,
    pub median_rel_dev: f64,
    pub worst: Worst,
}

impl SeparabilityReport {
    pub fn passes(&self, t: &Thresholds) -> bool {
        self.median_rel_dev < t.max_median && self.max_rel_dev < t.max_max
    }

    pub fn slice(&self, fixed_axis: Axis, fixed_value: f64) -> Option<&Slice> {
        self.slices
            .iter()
            .find(|s| s.fixed_axis == fixed_axis && s.fixed_value == fixed_value)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Key for exact coordinate grouping. Coordinates are positive, so the bit
/// pattern orders like the value.
fn key(x: f64) -> u64 {
    x.to_bits()
}

type Grid = BTreeMap<u64, BTreeMap<u64, f64>>;

fn pair_stats(grid: &Grid, axis: Axis) -> Vec<PairStat> {
    // Descending, so each ratio is larger-coordinate over smaller.
    let keys: Vec<u64> = grid.keys().rev().copied().collect();
    let mut out = Vec::new();
    for (a, &ka) in keys.iter().enumerate() {
        for &kb in &keys[a + 1..] {
            let (ra, rb) = (&grid[&ka], &grid[&kb]);
            let mut across = Vec::new();
            let mut ratios = Vec::new();
            for (ky, &va) in ra.iter().rev() {
                if let Some(&vb) = rb.get(ky) {
                    if vb != 0.0 {
                        across.push(f64::from_bits(*ky));
                        ratios.push(va / vb);
                    }
                }
            }
            if ratios.len() < 2 {
                continue;
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let rel_devs = ratios.iter().map(|r| (r - mean).abs() / mean.abs()).collect();
            out.push(PairStat {
                axis,
                first: f64::from_bits(ka),
                second: f64::from_bits(kb),
                across,
                ratios,
                rel_devs,
            });
        }
    }
    out
}

fn transpose(grid: &Grid) -> Grid {
    let mut t = Grid::new();
    for (kx, row) in grid {
        for (ky, &v) in row {
            t.entry(*ky).or_default().insert(*kx, v);
        }
    }
    t
}

fn cross_stats(row_pairs: &[PairStat]) -> Vec<CrossStat> {
    let mut out = Vec::new();
    for p in row_pairs {
        for i in 0..p.ratios.len() {
            for j in i + 1..p.ratios.len() {
                let (r1, r2) = (p.ratios[i], p.ratios[j]);
                out.push(CrossStat {
                    rows: [p.first, p.second],
                    cols: [p.across[i], p.across[j]],
                    rel_dev: (r1 - r2).abs() / (0.5 * (r1 + r2)).abs(),
                });
            }
        }
    }
    out
}

/// Accuracy sum and count per (row, column) cell, keyed by coordinate bits.
type CellSums = BTreeMap<(u64, u64), (f64, usize)>;

/// Groups samples into slices with one coordinate fixed, averages repeated
/// measurements of the same point, and computes the ratio statistics.
pub fn analyze_separability(data: &Dataset) -> Result<SeparabilityReport> {
    let mut slices = Vec::new();
    for fixed in Axis::ALL {
        let free: Vec<Axis> = Axis::ALL.into_iter().filter(|&a| a != fixed).collect();
        let (row_axis, col_axis) = (free[0], free[1]);

        let mut groups: BTreeMap<u64, CellSums> = BTreeMap::new();
        for s in data.iter() {
            let c = s.point.to_array();
            let cell = groups
                .entry(key(c[fixed.index()]))
                .or_default()
                .entry((key(c[row_axis.index()]), key(c[col_axis.index()])))
                .or_insert((0.0, 0));
            cell.0 += s.accuracy;
            cell.1 += 1;
        }

        for (kf, cells) in groups {
            let mut grid = Grid::new();
            for ((kx, ky), (sum, count)) in cells {
                grid.entry(kx).or_default().insert(ky, sum / count as f64);
            }
            let row_pairs = pair_stats(&grid, row_axis);
            let col_pairs = pair_stats(&transpose(&grid), col_axis);
            if row_pairs.is_empty() && col_pairs.is_empty() {
                continue;
            }
            let cross = cross_stats(&row_pairs);
            let pairs: Vec<PairStat> = row_pairs.into_iter().chain(col_pairs).collect();
            let mut devs: Vec<f64> = pairs.iter().flat_map(|p| p.rel_devs.iter().copied()).collect();
            let max_rel_dev = devs.iter().copied().fold(0.0, f64::max);
            slices.push(Slice {
                fixed_axis: fixed,
                fixed_value: f64::from_bits(kf),
                row_axis,
                col_axis,
                pairs,
                cross,
                max_rel_dev,
                median_rel_dev: median(&mut devs),
            });
        }
    }

    if slices.is_empty() {
        return Err(Error::InsufficientGrid(
            "no slice holds two rows sharing two columns (a 2x2 aligned block)".into(),
        ));
    }

    let mut all: Vec<f64> = Vec::new();
    let mut worst: Option<Worst> = None;
    for s in &slices {
        for p in &s.pairs {
            for (i, &dev) in p.rel_devs.iter().enumerate() {
                all.push(dev);
                if worst.as_ref().is_none_or(|w| dev > w.rel_dev) {
                    worst = Some(Worst {
                        fixed_axis: s.fixed_axis,
                        fixed_value: s.fixed_value,
                        pair_axis: p.axis,
                        pair: [p.first, p.second],
                        at: p.across[i],
                        rel_dev: dev,
                    });
                }
            }
        }
    }
    let max_rel_dev = all.iter().copied().fold(0.0, f64::max);
    Ok(SeparabilityReport {
        slices,
        max_rel_dev,
        median_rel_dev: median(&mut all),
        worst: worst.expect("at least one slice has a pair"),
    })
}
