//! Fitting accuracy predictors to measured samples.

mod dataset;
mod fit;
pub mod separability;

pub use dataset::{Dataset, Unit, CSV_HEADER};
pub use fit::{fit_full_tensor, fit_separable, mae, FitConfig, FitReport, MIN_DAMPING};
pub use separability::{analyze_separability, SeparabilityReport, Thresholds};
