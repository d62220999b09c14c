use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::interval::IntervalSet;

/// Unconditional coverage and average length of a set of intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub coverage: f64,
    /// Mean length over bounded intervals; NaN when every interval is
    /// unbounded.
    pub avg_length: f64,
    pub n_infinite: usize,
    pub n: usize,
}

/// Coverage indicators `1{y_i in C_i}` (closed endpoints).
pub fn cover_indicators(intervals: &[IntervalSet], y: &[f64]) -> Result<Vec<bool>> {
    if intervals.len() != y.len() {
        return invalid(format!(
            "{} intervals for {} outcomes",
            intervals.len(),
            y.len()
        ));
    }
    Ok(intervals.iter().zip(y).map(|(c, &v)| c.contains(v)).collect())
}

pub fn coverage_metrics(intervals: &[IntervalSet], y: &[f64]) -> Result<CoverageSummary> {
    let covered = cover_indicators(intervals, y)?;
    if covered.is_empty() {
        return invalid("coverage of an empty test set");
    }
    let n = covered.len();
    let hits = covered.iter().filter(|c| **c).count();
    let finite: Vec<f64> = intervals
        .iter()
        .map(IntervalSet::length)
        .filter(|l| l.is_finite())
        .collect();
    let avg_length = if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    Ok(CoverageSummary {
        coverage: hits as f64 / n as f64,
        avg_length,
        n_infinite: n - finite.len(),
        n,
    })
}
