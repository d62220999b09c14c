//! Full DCP: refit the conditional CDF on the sample augmented with each
//! trial outcome and keep the trial values whose rank-based p-value exceeds
//! `alpha`.

use rayon::prelude::*;

use crate::conformal::score::score_baseline;
use crate::data::{Alpha, Dataset};
use crate::error::{invalid, Result};
use crate::grid::TrialGrid;
use crate::interval::IntervalSet;
use crate::regress::{ConditionalModel, Estimator};

/// `(T + 1)^{-1} sum_t 1{V_t >= V_{T+1}}`, where the last score is the one
/// of the candidate point.
pub fn p_value(scores: &[f64]) -> Result<f64> {
    let Some(&last) = scores.last() else {
        return invalid("p-value of an empty score vector");
    };
    let hits = scores.iter().filter(|&&v| v >= last).count();
    Ok(hits as f64 / scores.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullDcpResult {
    pub grid: Vec<f64>,
    /// One p-value per trial value; `None` where the refit failed.
    pub p_values: Vec<Option<f64>>,
    /// Trial-grid indices whose refit failed.
    pub failed: Vec<usize>,
    /// Closed hull of the accepted trial values, `None` if none was accepted.
    pub accepted: Option<IntervalSet>,
}

impl FullDcpResult {
    /// Accepted set at another level, from the same p-value curve.
    pub fn accepted_at(&self, alpha: Alpha) -> Option<IntervalSet> {
        let members = self
            .grid
            .iter()
            .zip(&self.p_values)
            .filter(|(_, p)| p.is_some_and(|p| p > alpha.value()))
            .map(|(y, _)| *y)
            .collect();
        IntervalSet::hull_of(members)
    }
}

/// p-value of trial outcome `y` at `x_new`.
fn trial_p_value(data: &Dataset, x_new: &[f64], y: f64, estimator: &Estimator) -> Result<f64> {
    let augmented = data.augmented(y, x_new)?;
    let model = estimator.fit(&augmented)?;
    let scores = augmented
        .rows()
        .zip(augmented.y())
        .map(|(x, &v)| Ok(score_baseline(model.cdf(x, v)?)))
        .collect::<Result<Vec<f64>>>()?;
    p_value(&scores)
}

/// Full DCP over a trial grid. Grid points are processed in parallel and
/// reduced in grid order.
pub fn full_dcp(
    data: &Dataset,
    x_new: &[f64],
    alpha: Alpha,
    estimator: &Estimator,
    grid: &TrialGrid,
) -> Result<FullDcpResult> {
    if x_new.len() != data.n_features() {
        return invalid(format!(
            "query has {} predictors, dataset has {}",
            x_new.len(),
            data.n_features()
        ));
    }
    let p_values: Vec<Option<f64>> = grid
        .values()
        .par_iter()
        .map(|&y| trial_p_value(data, x_new, y, estimator).ok())
        .collect();
    let failed = p_values
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_none())
        .map(|(i, _)| i)
        .collect();
    let mut out = FullDcpResult {
        grid: grid.values().to_vec(),
        p_values,
        failed,
        accepted: None,
    };
    out.accepted = out.accepted_at(alpha);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_examples() {
        assert_eq!(p_value(&[0.1, 0.2, 0.3, 0.4, 0.9]).unwrap(), 0.2);
        assert_eq!(p_value(&[0.3; 6]).unwrap(), 1.0);
        assert_eq!(p_value(&[0.1, 0.2, 0.3, 0.4, 0.25]).unwrap(), 0.6);
        assert!(p_value(&[]).is_err());
    }

    #[test]
    fn full_dcp_on_three_points() {
        let data = Dataset::outcomes_only(vec![1.0, 2.0, 3.0]).unwrap();
        let grid = TrialGrid::new((0..=40).map(|k| f64::from(k) / 10.0).collect()).unwrap();
        let r = full_dcp(
            &data,
            &[],
            Alpha::new(0.25).unwrap(),
            &Estimator::default(),
            &grid,
        )
        .unwrap();
        assert!(r.failed.is_empty());
        for p in r.p_values.iter().flatten() {
            let k = p * 4.0;
            assert!((k - k.round()).abs() < 1e-12 && *p > 0.0 && *p <= 1.0);
        }
        let acc = r.accepted.unwrap();
        assert!(acc.contains(2.0));
        assert!(full_dcp(&data, &[1.0], Alpha::new(0.25).unwrap(), &Estimator::default(), &grid).is_err());
    }
}
