//! Budget-constrained depth/width/resolution planning for CNN pruning.
//!
//! The crate fits a model accuracy predictor (a sum of products of three
//! univariate polynomials, or the unconstrained coefficient tensor) to
//! `(d, w, r, accuracy)` samples, maximizes it over the cost surface
//! `d * w^2 * r^2 = T`, and drives the per-dimension sample collection
//! schedule against a pluggable trainer.
//!
//! Modules:
//! - [`model`]: ratio triples, predictors, the cost model and the map file format.
//! - [`regress`]: datasets, the full-tensor and separable fits, error metrics and
//!   the separability check.
//! - [`optimize`]: the constrained maximization and its stationarity residuals.
//! - [`collect`]: schedules, the trainer wire protocol and the collection driver.
//! - [`fixtures`]: measured accuracy tables bundled with the crate.

pub mod collect;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod par;
pub mod regress;

pub use error::{Error, Result};
pub use model::{AccuracySample, DimTriple, FullTensorMap, Map, Predictor, SeparableMap};
