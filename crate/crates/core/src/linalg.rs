//! Dense least-squares solves used by the regressions.

use nalgebra::{DMatrix, DVector};

/// Minimizes `|A x - b|^2 + ridge * |x|^2` through the SVD of `A`.
///
/// With `ridge == 0` this is the minimum-norm least-squares solution: singular
/// values below `max(m, n) * eps * sigma_max` are treated as zero.
pub fn svd_solve(a: &DMatrix<f64>, b: &DVector<f64>, ridge: f64) -> DVector<f64> {
    let (m, n) = a.shape();
    let svd = a.clone().svd(true, true);
    let (u, v_t) = match (svd.u.as_ref(), svd.v_t.as_ref()) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("SVD computed with both factors requested"),
    };
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = m.max(n) as f64 * f64::EPSILON * sigma_max;
    let utb = u.transpose() * b;
    let mut scaled = DVector::zeros(sigma.len());
    for (i, &s) in sigma.iter().enumerate() {
        scaled[i] = if ridge > 0.0 {
            s * utb[i] / (s * s + ridge)
        } else if s > cutoff {
            utb[i] / s
        } else {
            0.0
        };
    }
    v_t.transpose() * scaled
}
