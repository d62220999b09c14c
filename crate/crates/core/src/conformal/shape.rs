//! Shape adjustment `b(x, alpha)`: the lower quantile index of the shortest
//! interval with conditional probability `1 - alpha`.

use crate::data::Alpha;
use crate::error::{invalid, Result};
use crate::regress::{ConditionalDistribution, ConditionalModel};

/// Default number of grid steps over `[0, alpha]` (step `alpha / 100`).
pub const DEFAULT_Z_STEPS: usize = 100;

/// Minimises `z -> Q(z + 1 - alpha) - Q(z)` over `z in {0, z_step, ..., alpha}`.
/// Ties (up to rounding) go to the smallest `z`.
pub fn estimate_b(dist: &dyn ConditionalDistribution, alpha: Alpha, z_step: f64) -> Result<f64> {
    let a = alpha.value();
    if !(z_step > 0.0 && z_step <= a / 10.0 + 1e-15) {
        return invalid(format!("z_step must lie in (0, alpha / 10], got {z_step}"));
    }
    let steps = (a / z_step).round() as usize;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..=steps {
        let z = a * k as f64 / steps as f64;
        let len = dist.upper_quantile(z + alpha.level()) - dist.quantile(z);
        if len.is_nan() {
            continue;
        }
        if len < best.1 - 1e-12 * (1.0 + best.1.abs()) || best.1.is_infinite() && len < best.1 {
            best = (z, len);
        }
    }
    Ok(best.0)
}

/// [`estimate_b`] for the conditional distribution of `model` at `x`.
pub fn estimate_b_at(
    model: &dyn ConditionalModel,
    x: &[f64],
    alpha: Alpha,
    z_step: f64,
) -> Result<f64> {
    estimate_b(model.conditional(x)?.as_ref(), alpha, z_step)
}
