//! Conditional CDF estimators.
//!
//! Three families are provided: the linear quantile-regression process
//! ([`fit_qr_process`]), distribution regression ([`fit_dr`]) and a Gaussian
//! linear model built on OLS ([`fit_ols`]). All of them fit on the canonical
//! row order of the training sample, so the fitted CDF does not depend on how
//! rows were shuffled.

pub mod dr;
pub mod linalg;
pub mod ols;
pub mod qr;
mod rearrange;

pub use dr::{dr_cdf, fit_dr, DrFit, Link, Thresholds};
pub use ols::{fit_ols, OlsFit};
pub use qr::{fit_qr, fit_qr_process, pinball, qr_cdf, QrFit, QrSolution};
pub use rearrange::rearrange;

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::grid::{TauGrid, TrialGrid};
use crate::normal;

/// `F(., x)` for one query point.
pub trait ConditionalDistribution {
    /// `F(y | x)`, nondecreasing in `y` with values in [0, 1].
    fn cdf(&self, y: f64) -> f64;

    /// Lower quantile `inf {y : F(y) >= tau}`. Estimators with bounded
    /// support clamp to the fitted range; the Gaussian model returns `-inf`
    /// and `+inf` at 0 and 1.
    fn quantile(&self, tau: f64) -> f64;

    /// Upper quantile `sup {y : F(y) <= u}`, clamped in the same way.
    fn upper_quantile(&self, u: f64) -> f64;
}

/// A fitted conditional CDF model.
pub trait ConditionalModel: Send + Sync {
    fn n_features(&self) -> usize;

    fn conditional(&self, x: &[f64]) -> Result<Box<dyn ConditionalDistribution>>;

    fn cdf(&self, x: &[f64], y: f64) -> Result<f64> {
        Ok(self.conditional(x)?.cdf(y))
    }
}

/// Conditional CDF estimator configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// Quantile-regression process on a grid of levels.
    Qr { grid: TauGrid },
    /// Distribution regression on a set of thresholds.
    Dr { thresholds: Thresholds, link: Link },
    /// `N(x' b, s^2)` with OLS coefficients and RMS residual scale.
    Gaussian,
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Qr {
            grid: TauGrid::default(),
        }
    }
}

impl Estimator {
    /// Fits the estimator with an intercept plus the dataset's predictors.
    pub fn fit(&self, data: &Dataset) -> Result<CdfModel> {
        Ok(match self {
            Estimator::Qr { grid } => CdfModel::Qr(fit_qr_process(data, grid, true)?),
            Estimator::Dr { thresholds, link } => {
                let t = thresholds.resolve(data.y())?;
                CdfModel::Dr(fit_dr(data, &t, *link)?)
            }
            Estimator::Gaussian => CdfModel::Gaussian(fit_ols(data, false)?),
        })
    }
}

/// A fitted conditional CDF.
#[derive(Debug, Clone, PartialEq)]
pub enum CdfModel {
    Qr(QrFit),
    Dr(DrFit),
    Gaussian(OlsFit),
}

impl ConditionalModel for CdfModel {
    fn n_features(&self) -> usize {
        match self {
            CdfModel::Qr(f) => f.n_features(),
            CdfModel::Dr(f) => f.n_features(),
            CdfModel::Gaussian(f) => f.n_features(),
        }
    }

    fn conditional(&self, x: &[f64]) -> Result<Box<dyn ConditionalDistribution>> {
        Ok(match self {
            CdfModel::Qr(f) => Box::new(qr::QrConditional::new(f.curve(x)?, &f.tau_grid)),
            CdfModel::Dr(f) => Box::new(f.conditional(x)?),
            CdfModel::Gaussian(f) => Box::new(GaussianConditional {
                mean: f.mean(x)?,
                sd: f.residual_sd,
            }),
        })
    }
}

/// `N(mean, sd^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianConditional {
    pub mean: f64,
    pub sd: f64,
}

impl ConditionalDistribution for GaussianConditional {
    fn cdf(&self, y: f64) -> f64 {
        normal::cdf((y - self.mean) / self.sd)
    }

    fn quantile(&self, tau: f64) -> f64 {
        match tau {
            t if t <= 0.0 => f64::NEG_INFINITY,
            t if t >= 1.0 => f64::INFINITY,
            t => self.mean + self.sd * normal::quantile(t),
        }
    }

    fn upper_quantile(&self, u: f64) -> f64 {
        self.quantile(u)
    }
}

impl ConditionalDistribution for qr::QrConditional {
    fn cdf(&self, y: f64) -> f64 {
        qr::QrConditional::cdf(self, y)
    }

    fn quantile(&self, tau: f64) -> f64 {
        qr::QrConditional::quantile(self, tau)
    }

    fn upper_quantile(&self, u: f64) -> f64 {
        qr::QrConditional::upper_quantile(self, u)
    }
}

/// Smallest grid value `y` with `F(y | x) >= tau`. When no grid value
/// qualifies, returns the grid maximum and `true` (saturated).
pub fn invert_cdf(
    model: &dyn ConditionalModel,
    x: &[f64],
    tau: f64,
    grid: &TrialGrid,
) -> Result<(f64, bool)> {
    if !(tau > 0.0 && tau < 1.0) {
        return invalid(format!("tau must lie in (0, 1), got {tau}"));
    }
    let dist = model.conditional(x)?;
    let values = grid.values();
    let idx = values.partition_point(|&y| dist.cdf(y) < tau);
    Ok(match values.get(idx) {
        Some(&y) => (y, false),
        None => (grid.max(), true),
    })
}
