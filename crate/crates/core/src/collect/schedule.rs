use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DimTriple;
use crate::optimize::Budget;

use super::protocol::Dimension;

/// Pruning targets for one dimension, from just below the start down to the
/// budget floor in equal steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub dimension: Dimension,
    pub targets: Vec<f64>,
}

/// `targets[n] = x0 - (n + 1) * (x0 - x_min) / rounds` for `n < rounds`.
pub fn make_schedule(dimension: Dimension, x0: f64, x_min: f64, rounds: usize) -> Result<Schedule> {
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds per dimension must be at least 1".into()));
    }
    if !(x_min > 0.0 && x_min < x0 && x0 <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "schedule needs 0 < x_min < x0 <= 1, got x0 = {x0}, x_min = {x_min}"
        )));
    }
    let step = (x0 - x_min) / rounds as f64;
    let mut targets: Vec<f64> = (1..=rounds).map(|n| x0 - n as f64 * step).collect();
    targets[rounds - 1] = x_min;
    Ok(Schedule { dimension, targets })
}

/// Smallest useful value of each coordinate: pruning a single dimension down
/// to its floor already meets the budget, so the optimum never goes below it.
pub fn budget_floors(budget: Budget, base: &DimTriple) -> (f64, f64, f64) {
    let t = budget.value();
    (t * base.d(), t.sqrt() * base.w(), t.sqrt() * base.r())
}
