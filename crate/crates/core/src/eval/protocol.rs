use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Alpha, Dataset};
use crate::error::{invalid, Result};
use crate::eval::binned::{binned_coverage, Bin};
use crate::eval::dispersion::coverage_dispersion;
use crate::eval::methods::{run_method, MethodConfig};
use crate::eval::metrics::{cover_indicators, coverage_metrics};
use crate::interval::IntervalSet;

/// Metrics of one method on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub method: String,
    pub alpha: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub coverage: f64,
    /// Mean length of the bounded intervals, `None` if all were unbounded.
    pub avg_length: Option<f64>,
    pub n_infinite: usize,
    /// Bins of the first predictor (a single bin when there are none).
    pub bins: Vec<Bin>,
    pub dispersion_x100: f64,
}

/// Summarises predicted intervals on `test`.
pub fn coverage_report(
    method: &str,
    alpha: Alpha,
    n_train: usize,
    intervals: &[IntervalSet],
    test: &Dataset,
    n_bins: usize,
) -> Result<CoverageReport> {
    let y = test.y();
    let summary = coverage_metrics(intervals, y)?;
    let feature = if test.n_features() > 0 {
        test.column(0)
    } else {
        vec![0.0; test.len()]
    };
    let bins = binned_coverage(intervals, y, &feature, n_bins)?;
    let covered = cover_indicators(intervals, y)?;
    let x: Vec<Vec<f64>> = test.rows().map(<[f64]>::to_vec).collect();
    let dispersion = coverage_dispersion(&covered, &x)?;
    Ok(CoverageReport {
        method: method.to_string(),
        alpha: alpha.value(),
        n_train,
        n_test: test.len(),
        coverage: summary.coverage,
        avg_length: summary.avg_length.is_finite().then_some(summary.avg_length),
        n_infinite: summary.n_infinite,
        bins,
        dispersion_x100: dispersion.value_x100,
    })
}

/// Training and test rows of one rolling exercise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// The five rolling exercises on `t` time-ordered rows: exercise `j` trains
/// on `[j t/10, (j+5) t/10)` and tests on `[(j+5) t/10, (j+6) t/10)`.
pub fn rolling_windows(t: usize) -> Result<Vec<Window>> {
    if t < 100 {
        return invalid(format!("rolling evaluation needs at least 100 rows, got {t}"));
    }
    Ok((0..5)
        .map(|j| Window {
            train: j * t / 10..(j + 5) * t / 10,
            test: (j + 5) * t / 10..(j + 6) * t / 10,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingReport {
    pub exercises: Vec<CoverageReport>,
    /// Averages over exercises (bin by bin for the binned table).
    pub pooled: CoverageReport,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn pool(reports: &[CoverageReport]) -> CoverageReport {
    let first = &reports[0];
    let bins = (0..first.bins.len())
        .map(|k| {
            let col = || reports.iter().map(move |r| &r.bins[k]);
            Bin {
                lo: mean(col().map(|b| b.lo)).unwrap_or(f64::NAN),
                hi: mean(col().map(|b| b.hi)).unwrap_or(f64::NAN),
                coverage: mean(col().filter_map(|b| b.coverage)),
                length: mean(col().filter_map(|b| b.length)),
                n: col().map(|b| b.n).sum(),
            }
        })
        .collect();
    CoverageReport {
        method: first.method.clone(),
        alpha: first.alpha,
        n_train: first.n_train,
        n_test: reports.iter().map(|r| r.n_test).sum(),
        coverage: mean(reports.iter().map(|r| r.coverage)).unwrap_or(f64::NAN),
        avg_length: mean(reports.iter().filter_map(|r| r.avg_length)),
        n_infinite: reports.iter().map(|r| r.n_infinite).sum(),
        bins,
        dispersion_x100: mean(reports.iter().map(|r| r.dispersion_x100)).unwrap_or(f64::NAN),
    }
}

/// Rolling time-series evaluation over five consecutive exercises. Inside
/// each training window the fit/calibration split is contiguous.
pub fn rolling_ts_eval(data: &Dataset, config: &MethodConfig, n_bins: usize) -> Result<RollingReport> {
    if !data.time_ordered() {
        return invalid("rolling evaluation requires time-ordered data");
    }
    let windows = rolling_windows(data.len())?;
    let exercises = windows
        .par_iter()
        .map(|w| {
            let train = data.slice(w.train.start, w.train.end)?;
            let test = data.slice(w.test.start, w.test.end)?;
            let intervals = run_method(config, &train, &test)?;
            coverage_report(
                config.method.name(),
                config.alpha,
                train.len(),
                &intervals,
                &test,
                n_bins,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled = pool(&exercises);
    Ok(RollingReport { exercises, pooled })
}

/// Random holdout: `round(0.2 n)` test rows drawn with `seed`; training and
/// test indices are returned in increasing order.
pub fn holdout_split(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = (0.2 * n as f64).round() as usize;
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}

/// Random-holdout evaluation: 20% test rows, the remaining rows split into
/// fitting and calibration parts by `config`.
pub fn holdout_eval(data: &Dataset, config: &MethodConfig, n_bins: usize) -> Result<CoverageReport> {
    let (train_idx, test_idx) = holdout_split(data.len(), config.seed);
    if test_idx.len() < 2 {
        return invalid("holdout needs at least 2 test rows");
    }
    let train = data.subset(&train_idx)?;
    let test = data.subset(&test_idx)?;
    let mut cfg = config.clone();
    cfg.seed = config.seed.wrapping_add(1);
    let intervals = run_method(&cfg, &train, &test)?;
    coverage_report(
        config.method.name(),
        config.alpha,
        train.len(),
        &intervals,
        &test,
        n_bins,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_for_t_1000() {
        let w = rolling_windows(1000).unwrap();
        assert_eq!(w[0], Window { train: 0..500, test: 500..600 });
        assert_eq!(w[1], Window { train: 100..600, test: 600..700 });
        assert_eq!(w[4].test, 900..1000);
        assert!(rolling_windows(99).is_err());
    }

    #[test]
    fn holdout_partitions_rows() {
        let (a, b) = holdout_split(50, 9);
        assert_eq!(b.len(), 10);
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        assert_eq!(holdout_split(50, 9), (a, b));
    }
}
