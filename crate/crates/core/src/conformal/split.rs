//! Split DCP: fit the conditional CDF on one part of the sample, calibrate
//! the score threshold on the other.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conformal::score::{ConformityScore, ScoreKind};
use crate::data::{Alpha, Dataset};
use crate::error::{invalid, Result};
use crate::grid::TrialGrid;
use crate::interval::IntervalSet;
use crate::quantile::conformal_quantile;
use crate::regress::{CdfModel, ConditionalModel, Estimator};

/// How the sample is divided into a fitting part and a calibration part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    /// Fraction of rows used for fitting.
    pub frac: f64,
    /// Seed of a random split. `None`, or time-ordered data, gives a
    /// contiguous split (fitting rows first).
    pub seed: Option<u64>,
}

impl Split {
    pub fn contiguous(frac: f64) -> Self {
        Split { frac, seed: None }
    }

    pub fn random(frac: f64, seed: u64) -> Self {
        Split {
            frac,
            seed: Some(seed),
        }
    }

    /// Fitting and calibration row indices, each in increasing order. Both
    /// parts must hold at least `min_size` rows.
    pub fn indices(
        &self,
        n: usize,
        time_ordered: bool,
        min_size: usize,
    ) -> Result<(Vec<usize>, Vec<usize>)> {
        if !(self.frac > 0.0 && self.frac < 1.0) {
            return invalid(format!("split fraction must lie in (0, 1), got {}", self.frac));
        }
        let n1 = (n as f64 * self.frac).round() as usize;
        if n1 < min_size || n - n1 < min_size {
            return invalid(format!(
                "split of {n} rows into {n1} + {} leaves a part below {min_size} rows",
                n - n1
            ));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        match self.seed {
            Some(seed) if !time_ordered => {
                idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                let mut fit = idx[..n1].to_vec();
                let mut cal = idx[n1..].to_vec();
                fit.sort_unstable();
                cal.sort_unstable();
                Ok((fit, cal))
            }
            _ => {
                let cal = idx.split_off(n1);
                Ok((idx, cal))
            }
        }
    }
}

/// Fitted split-conformal DCP predictor.
#[derive(Debug, Clone)]
pub struct SplitModel {
    pub model: CdfModel,
    pub score: ConformityScore,
    /// Calibrated threshold; `+inf` when the calibration set is too small.
    pub threshold: f64,
    pub split_sizes: (usize, usize),
}

/// Fits the estimator on the fitting part and calibrates on the rest. Each
/// part must have at least `max(p + 1, 10)` rows.
pub fn split_dcp_fit(
    data: &Dataset,
    split: Split,
    alpha: Alpha,
    estimator: &Estimator,
    kind: ScoreKind,
) -> Result<SplitModel> {
    let min_size = (data.n_features() + 2).max(10);
    let (fit_idx, cal_idx) = split.indices(data.len(), data.time_ordered(), min_size)?;
    let model = estimator.fit(&data.subset(&fit_idx)?)?;
    let mut out = calibrate(model, &data.subset(&cal_idx)?, alpha, kind)?;
    out.split_sizes.0 = fit_idx.len();
    Ok(out)
}

/// Scores the calibration sample under a fitted model and sets the
/// threshold to their conformal quantile.
pub fn calibrate(
    model: CdfModel,
    calibration: &Dataset,
    alpha: Alpha,
    kind: ScoreKind,
) -> Result<SplitModel> {
    let score = ConformityScore::new(kind, alpha);
    let scores = calibration
        .rows()
        .zip(calibration.y())
        .map(|(x, &y)| score.score(model.conditional(x)?.as_ref(), y))
        .collect::<Result<Vec<f64>>>()?;
    let threshold = conformal_quantile(&scores, alpha)?;
    Ok(SplitModel {
        model,
        score,
        threshold,
        split_sizes: (0, calibration.len()),
    })
}

/// Prediction interval `{y : score(y) <= threshold}` at `x`. Its endpoints
/// are the lower quantile at `center - threshold` and the upper quantile at
/// `center + threshold`, with ranks clamped to [0, 1]. Infinite endpoints and
/// the `+inf` threshold fall back to the trial-grid hull.
pub fn split_dcp_predict(model: &SplitModel, x: &[f64], grid: &TrialGrid) -> Result<IntervalSet> {
    let dist = model.model.conditional(x)?;
    if model.threshold.is_infinite() {
        return Ok(IntervalSet::unbounded(grid.min(), grid.max()));
    }
    let center = model.score.center(dist.as_ref())?;
    let lo = dist.quantile((center - model.threshold).max(0.0));
    let hi = dist.upper_quantile((center + model.threshold).min(1.0));
    let lo = if lo.is_finite() { lo } else { grid.min() };
    let hi = if hi.is_finite() { hi } else { grid.max() };
    Ok(IntervalSet::new(lo, hi.max(lo)))
}
