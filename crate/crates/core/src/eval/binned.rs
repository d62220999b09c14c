use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::interval::IntervalSet;

/// Coverage and length within one bin of the conditioning feature. Empty
/// bins have no coverage or length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub coverage: Option<f64>,
    pub length: Option<f64>,
    pub n: usize,
}

/// Edges `e_0 <= ... <= e_B` at equally spaced empirical quantiles of
/// `feature`: `e_0 = min`, `e_k = x_(ceil(k n / B))`.
pub fn quantile_edges(feature: &[f64], n_bins: usize) -> Vec<f64> {
    let mut s = feature.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let mut edges = vec![s[0]];
    edges.extend((1..=n_bins).map(|k| s[(k * n).div_ceil(n_bins) - 1]));
    edges
}

/// Per-bin coverage and mean length. Bin `k` holds the points with
/// `e_{k-1} < x <= e_k`; the first bin also holds `x = e_0`. Each point goes
/// to the first bin that contains it.
pub fn binned_coverage(
    intervals: &[IntervalSet],
    y: &[f64],
    feature: &[f64],
    n_bins: usize,
) -> Result<Vec<Bin>> {
    if n_bins < 2 {
        return invalid(format!("need at least 2 bins, got {n_bins}"));
    }
    if intervals.len() != y.len() || feature.len() != y.len() {
        return invalid("intervals, outcomes and feature must be aligned");
    }
    if y.is_empty() {
        return invalid("binned coverage of an empty test set");
    }
    if feature.iter().any(|v| v.is_nan()) {
        return invalid("conditioning feature contains NaN");
    }
    let edges = quantile_edges(feature, n_bins);
    let mut hits = vec![0usize; n_bins];
    let mut counts = vec![0usize; n_bins];
    let mut lengths = vec![0.0; n_bins];
    let mut bounded = vec![0usize; n_bins];
    for ((c, &v), &f) in intervals.iter().zip(y).zip(feature) {
        let k = edges[1..].partition_point(|e| *e < f).min(n_bins - 1);
        counts[k] += 1;
        hits[k] += usize::from(c.contains(v));
        let l = c.length();
        if l.is_finite() {
            lengths[k] += l;
            bounded[k] += 1;
        }
    }
    Ok((0..n_bins)
        .map(|k| Bin {
            lo: edges[k],
            hi: edges[k + 1],
            coverage: (counts[k] > 0).then(|| hits[k] as f64 / counts[k] as f64),
            length: (bounded[k] > 0).then(|| lengths[k] / bounded[k] as f64),
            n: counts[k],
        })
        .collect())
}
