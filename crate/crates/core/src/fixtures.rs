//! CIFAR-10 accuracy tables for ResNet-32 and DenseNet-40 pruned along two
//! dimensions at a time, plus a smooth synthetic surface for closed-loop
//! experiments.
//!
//! Each table is a 5x5 grid with the third ratio held at 1.0. Accuracies are
//! percentages as measured.

use crate::error::Result;
use crate::model::{Map, SeparableMap};
use crate::regress::{Dataset, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    ResNet,
    DenseNet,
}

/// Which pair of ratios a table varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subtable {
    /// Rows are widths, columns resolutions.
    WidthResolution,
    /// Rows are depths, columns resolutions.
    DepthResolution,
    /// Rows are widths, columns depths.
    WidthDepth,
}

impl Architecture {
    pub const ALL: [Architecture; 2] = [Architecture::ResNet, Architecture::DenseNet];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::ResNet => "resnet",
            Architecture::DenseNet => "densenet",
        }
    }

    pub fn depths(self) -> [f64; 5] {
        match self {
            Architecture::ResNet => [0.11, 0.33, 0.55, 0.77, 1.00],
            Architecture::DenseNet => [0.20, 0.40, 0.60, 0.80, 1.00],
        }
    }
}

impl Subtable {
    pub const ALL: [Subtable; 3] = [Subtable::WidthResolution, Subtable::DepthResolution, Subtable::WidthDepth];
}

pub const WIDTHS: [f64; 5] = [0.6, 0.7, 0.8, 0.9, 1.0];
pub const RESOLUTIONS: [f64; 5] = [1.00, 0.87, 0.75, 0.62, 0.50];

type Grid = [[f64; 5]; 5];

const RESNET_WR: Grid = [
    [90.59, 89.43, 88.51, 86.59, 83.19],
    [91.39, 90.53, 89.26, 87.38, 84.62],
    [92.19, 90.95, 89.88, 88.38, 85.15],
    [92.54, 91.55, 90.77, 88.60, 85.93],
    [92.84, 91.87, 91.10, 89.38, 86.56],
];
const RESNET_DR: Grid = [
    [86.88, 85.91, 85.15, 83.64, 81.68],
    [92.30, 91.12, 90.08, 88.79, 85.87],
    [92.84, 91.87, 91.10, 89.38, 86.56],
    [93.43, 92.40, 91.77, 89.87, 87.17],
    [93.63, 92.63, 91.79, 90.14, 87.48],
];
const RESNET_WD: Grid = [
    [83.36, 89.39, 90.91, 91.41, 92.01],
    [84.03, 90.17, 91.43, 91.85, 92.36],
    [85.45, 91.21, 92.16, 92.65, 92.70],
    [86.14, 91.74, 92.60, 92.56, 93.12],
    [86.22, 92.12, 92.88, 93.17, 93.64],
];
const DENSENET_WR: Grid = [
    [90.82, 90.48, 89.62, 88.04, 85.63],
    [91.54, 90.98, 90.19, 88.79, 86.75],
    [91.99, 91.57, 90.59, 90.01, 87.67],
    [92.74, 92.08, 91.19, 90.56, 88.12],
    [93.09, 92.25, 92.05, 90.68, 88.38],
];
const DENSENET_DR: Grid = [
    [88.16, 87.64, 86.77, 85.50, 83.83],
    [92.00, 91.22, 90.32, 89.15, 86.89],
    [93.03, 92.06, 91.85, 90.63, 88.42],
    [93.80, 93.21, 92.78, 91.74, 89.25],
    [94.53, 93.75, 93.69, 92.21, 89.84],
];
const DENSENET_WD: Grid = [
    [84.51, 88.82, 89.95, 91.40, 92.70],
    [85.43, 89.26, 90.51, 92.35, 92.83],
    [86.92, 90.75, 91.07, 93.01, 93.66],
    [87.88, 91.74, 91.46, 93.14, 93.86],
    [88.16, 92.00, 93.03, 93.80, 94.53],
];

/// Accuracy grid in percent, indexed `[row][column]`.
pub fn grid(arch: Architecture, sub: Subtable) -> &'static Grid {
    match (arch, sub) {
        (Architecture::ResNet, Subtable::WidthResolution) => &RESNET_WR,
        (Architecture::ResNet, Subtable::DepthResolution) => &RESNET_DR,
        (Architecture::ResNet, Subtable::WidthDepth) => &RESNET_WD,
        (Architecture::DenseNet, Subtable::WidthResolution) => &DENSENET_WR,
        (Architecture::DenseNet, Subtable::DepthResolution) => &DENSENET_DR,
        (Architecture::DenseNet, Subtable::WidthDepth) => &DENSENET_WD,
    }
}

/// The `(d, w, r)` point of grid cell `[row][col]`.
pub fn grid_point(arch: Architecture, sub: Subtable, row: usize, col: usize) -> [f64; 3] {
    match sub {
        Subtable::WidthResolution => [1.0, WIDTHS[row], RESOLUTIONS[col]],
        Subtable::DepthResolution => [arch.depths()[row], 1.0, RESOLUTIONS[col]],
        Subtable::WidthDepth => [arch.depths()[col], WIDTHS[row], 1.0],
    }
}

/// One table as CSV text (`d,w,r,accuracy`, accuracy in percent).
pub fn subtable_csv(arch: Architecture, sub: Subtable) -> &'static str {
    match (arch, sub) {
        (Architecture::ResNet, Subtable::WidthResolution) => include_str!("../fixtures/resnet_a.csv"),
        (Architecture::ResNet, Subtable::DepthResolution) => include_str!("../fixtures/resnet_b.csv"),
        (Architecture::ResNet, Subtable::WidthDepth) => include_str!("../fixtures/resnet_c.csv"),
        (Architecture::DenseNet, Subtable::WidthResolution) => include_str!("../fixtures/densenet_a.csv"),
        (Architecture::DenseNet, Subtable::DepthResolution) => include_str!("../fixtures/densenet_b.csv"),
        (Architecture::DenseNet, Subtable::WidthDepth) => include_str!("../fixtures/densenet_c.csv"),
    }
}

/// Depth-resolution and width-depth tables combined, exact repeats removed.
///
/// The width-resolution table is left out: it is nominally at full depth, yet
/// for ResNet its full-width row repeats the depth-0.55 row of the
/// depth-resolution table, so its depth cannot be trusted.
pub fn merged_csv(arch: Architecture) -> &'static str {
    match arch {
        Architecture::ResNet => include_str!("../fixtures/resnet_appendix.csv"),
        Architecture::DenseNet => include_str!("../fixtures/densenet_appendix.csv"),
    }
}

pub fn subtable(arch: Architecture, sub: Subtable) -> Dataset {
    Dataset::read_csv(subtable_csv(arch, sub).as_bytes(), Unit::Percent).expect("bundled table parses")
}

pub fn merged(arch: Architecture) -> Dataset {
    Dataset::read_csv(merged_csv(arch).as_bytes(), Unit::Percent).expect("bundled table parses")
}

pub const TRUTH_MAP_JSON: &str = include_str!("../fixtures/truth_map.json");

/// Rank-1 cubic surface with `F(1, 1, 1) = 0.94` whose optimum at `T = 0.5`
/// is interior, near `(0.898, 0.874, 0.854)`.
pub fn truth_map() -> Result<SeparableMap> {
    match Map::from_json(TRUTH_MAP_JSON)? {
        Map::Separable(m) => Ok(m),
        Map::Full(_) => unreachable!("bundled truth map is separable"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Predictor;

    #[test]
    fn csv_files_match_grids() {
        for arch in Architecture::ALL {
            for sub in Subtable::ALL {
                let ds = subtable(arch, sub);
                assert_eq!(ds.len(), 25);
                let g = grid(arch, sub);
                for (k, s) in ds.iter().enumerate() {
                    let (row, col) = (k / 5, k % 5);
                    assert_eq!(s.point.to_array(), grid_point(arch, sub, row, col), "{arch:?} {sub:?} {k}");
                    assert!((s.accuracy * 100.0 - g[row][col]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn merged_tables() {
        let res = merged(Architecture::ResNet);
        let dense = merged(Architecture::DenseNet);
        assert_eq!((res.len(), dense.len()), (50, 45));
        let distinct = |ds: &Dataset| {
            let mut pts: Vec<[f64; 3]> = ds.iter().map(|s| s.point.to_array()).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            pts.len()
        };
        assert_eq!((distinct(&res), distinct(&dense)), (45, 45));
        let base: Vec<f64> = res.iter().filter(|s| s.point.is_base()).map(|s| s.accuracy).collect();
        assert_eq!(base.len(), 2);
        assert!((base[0] - 0.9363).abs() < 1e-12 && (base[1] - 0.9364).abs() < 1e-12);
        let expected = sub_then_dedup(Architecture::ResNet);
        assert_eq!(res, expected);
    }

    fn sub_then_dedup(arch: Architecture) -> Dataset {
        subtable(arch, Subtable::DepthResolution)
            .concat(&subtable(arch, Subtable::WidthDepth))
            .dedup_exact()
    }

    #[test]
    fn merged_is_concatenation_of_tables() {
        for arch in Architecture::ALL {
            assert_eq!(merged(arch), sub_then_dedup(arch));
        }
    }

    #[test]
    fn truth_surface() {
        let m = truth_map().unwrap();
        assert_eq!((m.degree(), m.rank()), (3, 1));
        assert!((m.value(1.0, 1.0, 1.0) - 0.94).abs() < 1e-12);
    }
}
