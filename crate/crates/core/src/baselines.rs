//! Split-conformal comparators built on quantile or mean regression.
//!
//! - `cqr`: score `max(lo - y, y - hi)` around the fitted `alpha/2` and
//!   `1 - alpha/2` quantiles.
//! - `cqr_r`: the CQR score divided by the fitted width `hi - lo`.
//! - `cqr_m`: one-sided deviations divided by the distance from the fitted
//!   median to the respective endpoint.
//! - `cp_ols`: absolute OLS residual.
//! - `cp_loc`: absolute OLS residual divided by a linear fit of the absolute
//!   residual.
//!
//! The `cqr_r` and `cqr_m` scores follow the cited variants; their exact
//! formulas are reconstructions. Fitted quantiles that cross are put back in
//! order (and counted) rather than rearranged. Denominators are floored at
//! 1e-6.

use serde::{Deserialize, Serialize};

use crate::conformal::Split;
use crate::data::{dot, features, Alpha, Dataset};
use crate::error::{invalid, Result};
use crate::interval::IntervalSet;
use crate::quantile::conformal_quantile;
use crate::regress::{fit_ols, fit_qr, OlsFit};

const FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Cqr,
    CqrM,
    CqrR,
    CpOls,
    CpLoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqrVariant {
    Plain,
    Median,
    Relative,
}

impl CqrVariant {
    fn method(self) -> BaselineMethod {
        match self {
            CqrVariant::Plain => BaselineMethod::Cqr,
            CqrVariant::Median => BaselineMethod::CqrM,
            CqrVariant::Relative => BaselineMethod::CqrR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Fitted {
    Quantiles {
        lo: Vec<f64>,
        hi: Vec<f64>,
        mid: Option<Vec<f64>>,
    },
    Mean(OlsFit),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub method: BaselineMethod,
    fitted: Fitted,
    pub threshold: f64,
    pub split_sizes: (usize, usize),
    /// Calibration points where the fitted quantiles crossed.
    pub crossings: usize,
    n_features: usize,
}

/// Fitted values at `x`: `(lo, mid, hi)` in increasing order for the
/// quantile methods (`mid` only for `cqr_m`), whether they had to be
/// reordered, or `(mean, scale)` for the mean methods.
enum Local {
    Band { lo: f64, mid: f64, hi: f64, crossed: bool },
    Mean { mean: f64, scale: f64 },
}

impl BaselineModel {
    fn local(&self, x: &[f64]) -> Result<Local> {
        if x.len() != self.n_features {
            return invalid(format!(
                "query has {} predictors, model expects {}",
                x.len(),
                self.n_features
            ));
        }
        let f = features(x, true);
        Ok(match &self.fitted {
            Fitted::Quantiles { lo, hi, mid } => {
                let (a, b) = (dot(&f, lo), dot(&f, hi));
                match mid {
                    None => Local::Band {
                        lo: a.min(b),
                        mid: 0.5 * (a + b),
                        hi: a.max(b),
                        crossed: a > b,
                    },
                    Some(m) => {
                        let mut v = [a, dot(&f, m), b];
                        let crossed = !(v[0] <= v[1] && v[1] <= v[2]);
                        v.sort_by(f64::total_cmp);
                        Local::Band {
                            lo: v[0],
                            mid: v[1],
                            hi: v[2],
                            crossed,
                        }
                    }
                }
            }
            Fitted::Mean(ols) => Local::Mean {
                mean: ols.mean(x)?,
                scale: match self.method {
                    BaselineMethod::CpLoc => ols.scale(x)?,
                    _ => 1.0,
                },
            },
        })
    }

    /// Calibration score of `(x, y)`, and whether the quantiles crossed.
    fn score(&self, x: &[f64], y: f64) -> Result<(f64, bool)> {
        Ok(match self.local(x)? {
            Local::Band { lo, mid, hi, crossed } => {
                let s = match self.method {
                    BaselineMethod::Cqr => (lo - y).max(y - hi),
                    BaselineMethod::CqrR => (lo - y).max(y - hi) / (hi - lo).max(FLOOR),
                    _ => ((lo - y) / (mid - lo).max(FLOOR)).max((y - hi) / (hi - mid).max(FLOOR)),
                };
                (s, crossed)
            }
            Local::Mean { mean, scale } => ((y - mean).abs() / scale, false),
        })
    }

    /// Prediction interval at `x`. A `+inf` threshold gives the whole line.
    pub fn predict(&self, x: &[f64]) -> Result<IntervalSet> {
        let local = self.local(x)?;
        let t = self.threshold;
        if t.is_infinite() {
            return Ok(IntervalSet::unbounded(f64::NEG_INFINITY, f64::INFINITY));
        }
        let (lower, upper) = match local {
            Local::Band { lo, mid, hi, .. } => match self.method {
                BaselineMethod::Cqr => (lo - t, hi + t),
                BaselineMethod::CqrR => {
                    let w = (hi - lo).max(FLOOR);
                    (lo - t * w, hi + t * w)
                }
                _ => (lo - t * (mid - lo).max(FLOOR), hi + t * (hi - mid).max(FLOOR)),
            },
            Local::Mean { mean, scale } => (mean - t * scale, mean + t * scale),
        };
        // A negative threshold can shrink the band past a point.
        if lower > upper {
            let m = 0.5 * (lower + upper);
            return Ok(IntervalSet::new(m, m));
        }
        Ok(IntervalSet::new(lower, upper))
    }
}

fn split_parts(data: &Dataset, split: Split) -> Result<(Dataset, Dataset)> {
    let min_size = (data.n_features() + 2).max(10);
    let (a, b) = split.indices(data.len(), data.time_ordered(), min_size)?;
    Ok((data.subset(&a)?, data.subset(&b)?))
}

fn calibrate(mut model: BaselineModel, cal: &Dataset, alpha: Alpha) -> Result<BaselineModel> {
    let mut scores = Vec::with_capacity(cal.len());
    for (x, &y) in cal.rows().zip(cal.y()) {
        let (s, crossed) = model.score(x, y)?;
        scores.push(s);
        model.crossings += usize::from(crossed);
    }
    model.threshold = conformal_quantile(&scores, alpha)?;
    model.split_sizes.1 = cal.len();
    Ok(model)
}

/// CQR family: quantile regressions at `alpha/2` and `1 - alpha/2` (and the
/// median for `cqr_m`) on the fitting part, calibrated on the rest.
pub fn cqr_fit(data: &Dataset, split: Split, alpha: Alpha, variant: CqrVariant) -> Result<BaselineModel> {
    let (fit, cal) = split_parts(data, split)?;
    let (x, y) = fit.canonical_design(true);
    let a = alpha.value();
    let lo = fit_qr(&x, &y, a / 2.0)?.beta;
    let hi = fit_qr(&x, &y, 1.0 - a / 2.0)?.beta;
    let mid = match variant {
        CqrVariant::Median => Some(fit_qr(&x, &y, 0.5)?.beta),
        _ => None,
    };
    let model = BaselineModel {
        method: variant.method(),
        fitted: Fitted::Quantiles { lo, hi, mid },
        threshold: f64::NAN,
        split_sizes: (fit.len(), 0),
        crossings: 0,
        n_features: data.n_features(),
    };
    calibrate(model, &cal, alpha)
}

/// Mean-regression comparators: `cp_ols`, or `cp_loc` when `weighted`.
pub fn cp_mean_fit(data: &Dataset, split: Split, alpha: Alpha, weighted: bool) -> Result<BaselineModel> {
    let (fit, cal) = split_parts(data, split)?;
    let model = BaselineModel {
        method: if weighted {
            BaselineMethod::CpLoc
        } else {
            BaselineMethod::CpOls
        },
        fitted: Fitted::Mean(fit_ols(&fit, weighted)?),
        threshold: f64::NAN,
        split_sizes: (fit.len(), 0),
        crossings: 0,
        n_features: data.n_features(),
    };
    calibrate(model, &cal, alpha)
}

pub fn cqr_predict(model: &BaselineModel, x: &[f64]) -> Result<IntervalSet> {
    model.predict(x)
}

pub fn cp_mean_predict(model: &BaselineModel, x: &[f64]) -> Result<IntervalSet> {
    model.predict(x)
}

/// Fits any of the five comparators.
pub fn baseline_fit(
    data: &Dataset,
    split: Split,
    alpha: Alpha,
    method: BaselineMethod,
) -> Result<BaselineModel> {
    match method {
        BaselineMethod::Cqr => cqr_fit(data, split, alpha, CqrVariant::Plain),
        BaselineMethod::CqrM => cqr_fit(data, split, alpha, CqrVariant::Median),
        BaselineMethod::CqrR => cqr_fit(data, split, alpha, CqrVariant::Relative),
        BaselineMethod::CpOls => cp_mean_fit(data, split, alpha, false),
        BaselineMethod::CpLoc => cp_mean_fit(data, split, alpha, true),
    }
}
