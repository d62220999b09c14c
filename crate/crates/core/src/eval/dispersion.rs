use serde::{Deserialize, Serialize};

use crate::data::{dot, features, Design};
use crate::error::{invalid, Result};
use crate::regress::dr::{newton, Link};
use crate::regress::linalg::check_full_rank;

const RIDGE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    /// Standard deviation of the fitted coverage probabilities, times 100.
    pub value_x100: f64,
    /// The indicator was constant, so no regression was fitted.
    pub constant_indicator: bool,
}

/// Spread of predicted conditional coverage: a ridge-penalised logistic
/// regression of the coverage indicator on an intercept and `x`, evaluated
/// in sample; returns the population standard deviation of the fitted
/// probabilities times 100.
pub fn coverage_dispersion(covered: &[bool], x: &[Vec<f64>]) -> Result<Dispersion> {
    if covered.len() != x.len() {
        return invalid("coverage indicator and predictors must be aligned");
    }
    if covered.len() < 2 {
        return invalid("coverage dispersion needs at least 2 rows");
    }
    let hits = covered.iter().filter(|c| **c).count();
    if hits == 0 || hits == covered.len() {
        return Ok(Dispersion {
            value_x100: 0.0,
            constant_indicator: true,
        });
    }
    let mut rows: Vec<Vec<f64>> = x.iter().map(|r| features(r, true)).collect();
    // Constant predictor columns carry no information and would make the
    // design singular; drop them.
    let p = rows[0].len();
    let keep: Vec<usize> = (0..p)
        .filter(|&j| j == 0 || rows.iter().any(|r| r[j] != rows[0][j]))
        .collect();
    rows = rows
        .into_iter()
        .map(|r| keep.iter().map(|&j| r[j]).collect())
        .collect();
    let design = Design::from_rows(&rows)?;
    check_full_rank(&design)?;
    let d: Vec<f64> = covered.iter().map(|&c| f64::from(u8::from(c))).collect();
    let share = hits as f64 / d.len() as f64;
    let mut start = vec![0.0; keep.len()];
    start[0] = (share / (1.0 - share)).ln();
    let (beta, _) = newton(&design, &d, Link::Logit, RIDGE, start, f64::INFINITY);
    let probs: Vec<f64> = rows.iter().map(|r| Link::Logit.cdf(dot(r, &beta))).collect();
    let n = probs.len() as f64;
    let mean = probs.iter().sum::<f64>() / n;
    let var = probs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / n;
    Ok(Dispersion {
        value_x100: 100.0 * var.sqrt(),
        constant_indicator: false,
    })
}
