//! Ratio triples, accuracy predictors and the proportional cost model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Depth, width and resolution of a pruned model relative to its base model.
///
/// Every coordinate lies in `(0, 1]`; the base model itself is `(1, 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct DimTriple {
    d: f64,
    w: f64,
    r: f64,
}

#[derive(Deserialize)]
struct RawTriple {
    d: f64,
    w: f64,
    r: f64,
}

impl TryFrom<RawTriple> for DimTriple {
    type Error = Error;

    fn try_from(raw: RawTriple) -> Result<Self> {
        DimTriple::new(raw.d, raw.w, raw.r)
    }
}

impl DimTriple {
    pub const BASE: DimTriple = DimTriple { d: 1.0, w: 1.0, r: 1.0 };

    pub fn new(d: f64, w: f64, r: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0 && x <= 1.0;
        if ok(d) && ok(w) && ok(r) {
            Ok(DimTriple { d, w, r })
        } else {
            Err(Error::InvalidPoint { d, w, r })
        }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.d, self.w, self.r]
    }

    pub fn is_base(&self) -> bool {
        *self == Self::BASE
    }

    /// Largest coordinate-wise absolute difference.
    pub fn linf_distance(&self, other: &DimTriple) -> f64 {
        (self.d - other.d)
            .abs()
            .max((self.w - other.w).abs())
            .max((self.r - other.r).abs())
    }
}

/// One regression datum: a ratio triple and the accuracy measured there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracySample {
    pub point: DimTriple,
    /// Fraction in `[0, 1]`.
    pub accuracy: f64,
}

impl AccuracySample {
    pub fn new(point: DimTriple, accuracy: f64) -> Result<Self> {
        if !(accuracy.is_finite() && (0.0..=1.0).contains(&accuracy)) {
            return Err(Error::InvalidAccuracy(accuracy));
        }
        Ok(AccuracySample { point, accuracy })
    }
}

/// Horner evaluation of `sum_i coeffs[i] * x^i`.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of the derivative polynomial. A constant maps to `[0.0]`.
pub fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

/// Value and first derivative in one Horner pass.
fn eval_poly_with_slope(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for &c in coeffs.iter().rev() {
        slope = slope * x + value;
        value = value * x + c;
    }
    (value, slope)
}

/// Anything that predicts accuracy from `(d, w, r)`.
///
/// Predictors are evaluated on raw coordinates so that optimizers can probe
/// points without constructing validated triples; nothing here clamps the
/// output to `[0, 1]`.
pub trait Predictor: Sync {
    fn value(&self, d: f64, w: f64, r: f64) -> f64;

    /// Partial derivatives with respect to `d`, `w` and `r`.
    fn gradient(&self, d: f64, w: f64, r: f64) -> [f64; 3];

    fn predict(&self, p: &DimTriple) -> f64 {
        self.value(p.d, p.w, p.r)
    }
}

/// One rank component `H(d; s) * H(w; u) * H(r; v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Factor {
    pub fn new(s: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Self {
        Factor { s, u, v }
    }
}

/// Rank-`R`, degree-`K` separable predictor: a sum of `R` products of three
/// univariate polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableMap {
    degree: usize,
    factors: Vec<Factor>,
}

impl SeparableMap {
    pub fn new(degree: usize, factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidConfig("separable map needs rank >= 1".into()));
        }
        for (q, f) in factors.iter().enumerate() {
            for (name, v) in [("s", &f.s), ("u", &f.u), ("v", &f.v)] {
                if v.len() != degree + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "factor {q}: {name} has {} coefficients, expected {}",
                        v.len(),
                        degree + 1
                    )));
                }
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite("separable map coefficients"));
                }
            }
        }
        Ok(SeparableMap { degree, factors })
    }

    /// Rank-1 map that predicts `value` everywhere.
    pub fn constant(value: f64, degree: usize) -> Self {
        let mut s = vec![0.0; degree + 1];
        s[0] = value;
        let mut unit = vec![0.0; degree + 1];
        unit[0] = 1.0;
        SeparableMap {
            degree,
            factors: vec![Factor::new(s, unit.clone(), unit)],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Rescales every component so that `|u_q| = |v_q| = 1`, moving the
    /// magnitude into `s_q`. Components with a zero `u` or `v` are left as is,
    /// and so are components already normalized up to rounding, which makes
    /// the operation idempotent.
    pub fn canonicalize(&mut self) {
        for f in &mut self.factors {
            canonicalize_component(&mut f.s, &mut f.u, &mut f.v);
        }
    }

    /// The coefficient tensor `theta_ijk = sum_q s_qi u_qj v_qk`.
    pub fn to_full(&self) -> FullTensorMap {
        let n = self.degree + 1;
        let mut coefficients = vec![0.0; n * n * n];
        for f in &self.factors {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        coefficients[(i * n + j) * n + k] += f.s[i] * f.u[j] * f.v[k];
                    }
                }
            }
        }
        FullTensorMap {
            degree: self.degree,
            coefficients,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl Predictor for SeparableMap {
    fn value(&self, d: f64, w: f64, r: f64) -> f64 {
        self.factors
            .iter()
            .map(|f| eval_poly(&f.s, d) * eval_poly(&f.u, w) * eval_poly(&f.v, r))
            .sum()
    }

    fn gradient(&self, d: f64, w: f64, r: f64) -> [f64; 3] {
        let mut g = [0.0; 3];
        for f in &self.factors {
            let (hd, dd) = eval_poly_with_slope(&f.s, d);
            let (hw, dw) = eval_poly_with_slope(&f.u, w);
            let (hr, dr) = eval_poly_with_slope(&f.v, r);
            g[0] += dd * hw * hr;
            g[1] += hd * dw * hr;
            g[2] += hd * hw * dr;
        }
        g
    }
}

/// Unconstrained degree-`K` trivariate polynomial with `(K+1)^3` coefficients.
///
/// `coefficients[(i * (K+1) + j) * (K+1) + k]` multiplies `d^i w^j r^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTensorMap {
    degree: usize,
    coefficients: Vec<f64>,
}

impl FullTensorMap {
    pub fn new(degree: usize, coefficients: Vec<f64>) -> Result<Self> {
        let n = degree + 1;
        if coefficients.len() != n * n * n {
            return Err(Error::InvalidConfig(format!(
                "full tensor of degree {degree} needs {} coefficients, got {}",
                n * n * n,
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("full tensor coefficients"));
        }
        Ok(FullTensorMap {
            degree,
            coefficients,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.degree + 1;
        self.coefficients[(i * n + j) * n + k]
    }

    /// Collapses the `r` and `w` axes for fixed `(w, r)`, leaving the
    /// polynomial in `d` (and its `w`, `r` partials when asked).
    fn reduce(&self, w: f64, r: f64) -> [Vec<f64>; 3] {
        let n = self.degree + 1;
        let mut in_d = vec![0.0; n];
        let mut dw = vec![0.0; n];
        let mut dr = vec![0.0; n];
        let mut row_val = vec![0.0; n];
        let mut row_slope = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let base = (i * n + j) * n;
                let (v, s) = eval_poly_with_slope(&self.coefficients[base..base + n], r);
                row_val[j] = v;
                row_slope[j] = s;
            }
            let (v, s) = eval_poly_with_slope(&row_val, w);
            in_d[i] = v;
            dw[i] = s;
            dr[i] = eval_poly(&row_slope, w);
        }
        [in_d, dw, dr]
    }
}

impl Predictor for FullTensorMap {
    fn value(&self, d: f64, w: f64, r: f64) -> f64 {
        let n = self.degree + 1;
        let mut acc_d = 0.0;
        for i in (0..n).rev() {
            let mut acc_w = 0.0;
            for j in (0..n).rev() {
                let base = (i * n + j) * n;
                acc_w = acc_w * w + eval_poly(&self.coefficients[base..base + n], r);
            }
            acc_d = acc_d * d + acc_w;
        }
        acc_d
    }

    fn gradient(&self, d: f64, w: f64, r: f64) -> [f64; 3] {
        let [in_d, dw, dr] = self.reduce(w, r);
        let (_, gd) = eval_poly_with_slope(&in_d, d);
        [gd, eval_poly(&dw, d), eval_poly(&dr, d)]
    }
}

/// Either predictor family, as stored in map documents.
#[derive(Debug, Clone, PartialEq)]
pub enum Map {
    Separable(SeparableMap),
    Full(FullTensorMap),
}

impl Map {
    pub fn degree(&self) -> usize {
        match self {
            Map::Separable(m) => m.degree(),
            Map::Full(m) => m.degree(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Map::Separable(_) => "separable",
            Map::Full(_) => "full",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MapDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MapDocument = serde_json::from_str(text)?;
        doc.into_map()
    }
}

impl From<SeparableMap> for Map {
    fn from(m: SeparableMap) -> Self {
        Map::Separable(m)
    }
}

impl From<FullTensorMap> for Map {
    fn from(m: FullTensorMap) -> Self {
        Map::Full(m)
    }
}

impl Predictor for Map {
    fn value(&self, d: f64, w: f64, r: f64) -> f64 {
        match self {
            Map::Separable(m) => m.value(d, w, r),
            Map::Full(m) => m.value(d, w, r),
        }
    }

    fn gradient(&self, d: f64, w: f64, r: f64) -> [f64; 3] {
        match self {
            Map::Separable(m) => m.gradient(d, w, r),
            Map::Full(m) => m.gradient(d, w, r),
        }
    }
}

pub const MAP_FORMAT: &str = "map/v1";

pub(crate) fn canonicalize_component(s: &mut [f64], u: &mut [f64], v: &mut [f64]) {
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 || !nu.is_finite() || !nv.is_finite() {
        return;
    }
    let unit = |n: f64| (n - 1.0).abs() <= 4.0 * f64::EPSILON;
    if unit(nu) && unit(nv) {
        return;
    }
    u.iter_mut().for_each(|c| *c /= nu);
    v.iter_mut().for_each(|c| *c /= nv);
    let scale = nu * nv;
    s.iter_mut().for_each(|c| *c *= scale);
}

/// On-disk layout of a map document (`"format": "map/v1"`).
#[derive(Debug, Serialize, Deserialize)]
struct MapDocument {
    format: String,
    kind: String,
    degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<Factor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<f64>>,
}

impl From<&Map> for MapDocument {
    fn from(map: &Map) -> Self {
        match map {
            Map::Separable(m) => MapDocument {
                format: MAP_FORMAT.into(),
                kind: "separable".into(),
                degree: m.degree,
                rank: Some(m.rank()),
                factors: Some(m.factors.clone()),
                coefficients: None,
            },
            Map::Full(m) => MapDocument {
                format: MAP_FORMAT.into(),
                kind: "full".into(),
                degree: m.degree,
                rank: None,
                factors: None,
                coefficients: Some(m.coefficients.clone()),
            },
        }
    }
}

impl MapDocument {
    fn into_map(self) -> Result<Map> {
        if self.format != MAP_FORMAT {
            return Err(Error::MapFormat(format!(
                "unsupported format {:?}, expected {MAP_FORMAT:?}",
                self.format
            )));
        }
        match self.kind.as_str() {
            "separable" => {
                let factors = self
                    .factors
                    .ok_or_else(|| Error::MapFormat("separable map without factors".into()))?;
                if let Some(rank) = self.rank {
                    if rank != factors.len() {
                        return Err(Error::MapFormat(format!(
                            "rank {rank} disagrees with {} factors",
                            factors.len()
                        )));
                    }
                }
                Ok(Map::Separable(SeparableMap::new(self.degree, factors)?))
            }
            "full" => {
                let coefficients = self
                    .coefficients
                    .ok_or_else(|| Error::MapFormat("full map without coefficients".into()))?;
                Ok(Map::Full(FullTensorMap::new(self.degree, coefficients)?))
            }
            other => Err(Error::MapFormat(format!("unknown map kind {other:?}"))),
        }
    }
}

/// Relative computational cost `d * w^2 * r^2` of a pruned model.
pub fn cost(p: &DimTriple) -> f64 {
    p.d * p.w * p.w * p.r * p.r
}

/// FLOPs reduction ratio under the proportional cost model.
pub fn frr(p: &DimTriple) -> f64 {
    1.0 - cost(p)
}

/// Parameter reduction ratio under the approximation `params ~ d * w^2`
/// (input resolution does not change the parameter count).
pub fn prr_estimate(p: &DimTriple) -> f64 {
    1.0 - p.d * p.w * p.w
}
