//! Least-squares mean model, with an optional linear model for the absolute
//! residual used as a local scale.

use crate::data::{dot, features, Dataset};
use crate::error::{invalid, Result};
use crate::regress::linalg::{check_full_rank, weighted_least_squares};

const SCALE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Intercept first, then one coefficient per predictor.
    pub beta: Vec<f64>,
    /// RMS residual, floored at 1e-6.
    pub residual_sd: f64,
    /// Coefficients of `|residual|` regressed on the same design.
    pub scale_beta: Option<Vec<f64>>,
    n_features: usize,
}

impl OlsFit {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn check(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features {
            return invalid(format!(
                "query has {} predictors, model expects {}",
                x.len(),
                self.n_features
            ));
        }
        Ok(features(x, true))
    }

    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        Ok(dot(&self.check(x)?, &self.beta))
    }

    /// Fitted local scale, floored at 1e-6. Falls back to `residual_sd` when
    /// no scale model was fitted.
    pub fn scale(&self, x: &[f64]) -> Result<f64> {
        let f = self.check(x)?;
        Ok(match &self.scale_beta {
            Some(b) => dot(&f, b).max(SCALE_FLOOR),
            None => self.residual_sd,
        })
    }
}

pub fn fit_ols(data: &Dataset, fit_scale: bool) -> Result<OlsFit> {
    let (x, y) = data.canonical_design(true);
    check_full_rank(&x)?;
    let beta = weighted_least_squares(&x, &y, None)?;
    let resid: Vec<f64> = (0..x.nrows()).map(|i| y[i] - dot(x.row(i), &beta)).collect();
    let rms = (resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64).sqrt();
    let scale_beta = if fit_scale {
        let abs: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
        Some(weighted_least_squares(&x, &abs, None)?)
    } else {
        None
    };
    Ok(OlsFit {
        beta,
        residual_sd: rms.max(SCALE_FLOOR),
        scale_beta,
        n_features: data.n_features(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_floors_scale() {
        let data = Dataset::new(
            vec![0.0, 2.0, 4.0, 6.0],
            (0..4).map(|i| vec![f64::from(i)]).collect(),
        )
        .unwrap();
        let fit = fit_ols(&data, true).unwrap();
        assert!(fit.beta[0].abs() < 1e-12 && (fit.beta[1] - 2.0).abs() < 1e-12);
        assert_eq!(fit.residual_sd, SCALE_FLOOR);
        assert_eq!(fit.scale(&[1.0]).unwrap(), SCALE_FLOOR);
    }

    #[test]
    fn intercept_only_mean() {
        let data = Dataset::outcomes_only(vec![0.0, 2.0]).unwrap();
        let fit = fit_ols(&data, false).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-15);
        assert!((fit.residual_sd - 1.0).abs() < 1e-15);
        assert_eq!(fit.scale(&[]).unwrap(), fit.residual_sd);
        let data = Dataset::outcomes_only(vec![1.0, 2.0, 6.0]).unwrap();
        assert!((fit_ols(&data, false).unwrap().beta[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_predictor_is_singular() {
        let data = Dataset::new(vec![1.0, 2.0, 3.0], vec![vec![1.0]; 3]).unwrap();
        assert_eq!(fit_ols(&data, false), Err(crate::Error::SingularDesign));
        assert!(fit_ols(&Dataset::outcomes_only(vec![1.0, 2.0]).unwrap(), false)
            .unwrap()
            .mean(&[1.0])
            .is_err());
    }
}
