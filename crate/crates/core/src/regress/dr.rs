//! Distribution regression: one binary-response regression of `1{Y <= y_k}`
//! on `x` per threshold `y_k`, giving `F(y_k | x) = L(x' b(y_k))`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{dot, features, Dataset, Design};
use crate::error::{invalid, Result};
use crate::normal;
use crate::regress::linalg::{check_full_rank, solve_spd};
use crate::regress::rearrange;
use crate::regress::ConditionalDistribution;

const RIDGE: f64 = 1e-6;
const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 100;
/// Linear index beyond which a fit is treated as separated.
const SEPARATION_INDEX: f64 = 30.0;
/// Clamp for the constant fallback fit, on the logit scale.
const FALLBACK_LOGIT: f64 = 15.0;
const SEPARATION_FIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logit,
    Probit,
}

impl Link {
    pub fn cdf(self, eta: f64) -> f64 {
        match self {
            Link::Logit => logistic(eta),
            Link::Probit => normal::cdf(eta),
        }
    }

    fn inverse(self, p: f64) -> f64 {
        match self {
            Link::Logit => (p / (1.0 - p)).ln(),
            Link::Probit => normal::quantile(p),
        }
    }
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Threshold grid for distribution regression.
#[derive(Debug, Clone, PartialEq)]
pub enum Thresholds {
    /// Empirical quantiles of the outcome at levels `k / (n + 1)`,
    /// `k = 1..=n`, with duplicates removed.
    Quantiles(usize),
    Fixed(Vec<f64>),
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::Quantiles(99)
    }
}

impl Thresholds {
    pub fn resolve(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            Thresholds::Fixed(t) => Ok(t.clone()),
            Thresholds::Quantiles(0) => invalid("threshold count must be positive"),
            Thresholds::Quantiles(m) => {
                if y.is_empty() {
                    return invalid("no outcomes to place thresholds");
                }
                let mut sorted = y.to_vec();
                sorted.sort_by(f64::total_cmp);
                let n = sorted.len();
                let mut out: Vec<f64> = (1..=*m)
                    .map(|k| {
                        let level = k as f64 / (*m + 1) as f64;
                        let r = ((level * n as f64) - 1e-9).ceil().max(1.0) as usize;
                        sorted[r.min(n) - 1]
                    })
                    .collect();
                out.dedup();
                Ok(out)
            }
        }
    }
}

/// Fitted distribution-regression process.
#[derive(Debug, Clone, PartialEq)]
pub struct DrFit {
    pub threshold_grid: Vec<f64>,
    pub betas: Vec<Vec<f64>>,
    pub link: Link,
    /// Thresholds where the fit fell back to the constant model.
    pub degenerate: Vec<bool>,
    n_features: usize,
}

impl DrFit {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn conditional(&self, x: &[f64]) -> Result<DrConditional> {
        if x.len() != self.n_features {
            return invalid(format!(
                "query has {} predictors, model expects {}",
                x.len(),
                self.n_features
            ));
        }
        let f = features(x, true);
        let probs = self.betas.iter().map(|b| self.link.cdf(dot(&f, b))).collect();
        Ok(DrConditional {
            thresholds: self.threshold_grid.clone(),
            probs: rearrange(probs),
        })
    }
}

/// Step CDF through the rearranged threshold probabilities: `F(y) = p_k` for
/// the largest threshold `y_k <= y`, and 0 below the first threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DrConditional {
    thresholds: Vec<f64>,
    probs: Vec<f64>,
}

impl ConditionalDistribution for DrConditional {
    fn cdf(&self, y: f64) -> f64 {
        match self.thresholds.partition_point(|t| *t <= y) {
            0 => 0.0,
            k => self.probs[k - 1],
        }
    }

    fn quantile(&self, tau: f64) -> f64 {
        let k = self.probs.partition_point(|p| *p < tau);
        self.thresholds[k.min(self.thresholds.len() - 1)]
    }

    fn upper_quantile(&self, u: f64) -> f64 {
        let k = self.probs.partition_point(|p| *p <= u);
        self.thresholds[k.min(self.thresholds.len() - 1)]
    }
}

pub fn dr_cdf(fit: &DrFit, x: &[f64], y: f64) -> Result<f64> {
    Ok(fit.conditional(x)?.cdf(y))
}

/// Fits one binary regression per threshold (in parallel, assembled in
/// threshold order).
pub fn fit_dr(data: &Dataset, thresholds: &[f64], link: Link) -> Result<DrFit> {
    if thresholds.is_empty() {
        return invalid("distribution regression needs at least one threshold");
    }
    if thresholds.iter().any(|t| !t.is_finite()) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("thresholds must be finite and strictly increasing");
    }
    let (x, y) = data.canonical_design(true);
    check_full_rank(&x)?;
    let fits: Vec<(Vec<f64>, bool)> = thresholds
        .par_iter()
        .map(|&t| {
            let d: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v <= t))).collect();
            fit_binary(&x, &d, link)
        })
        .collect();
    let (betas, degenerate) = fits.into_iter().unzip();
    Ok(DrFit {
        threshold_grid: thresholds.to_vec(),
        betas,
        link,
        degenerate,
        n_features: data.n_features(),
    })
}

/// Ridge-penalised (slopes only) average log-likelihood.
fn objective(x: &Design, d: &[f64], beta: &[f64], link: Link, ridge: f64) -> f64 {
    let n = x.nrows() as f64;
    let ll: f64 = (0..x.nrows())
        .map(|i| {
            let eta = dot(x.row(i), beta);
            match link {
                Link::Logit => d[i] * eta - softplus(eta),
                Link::Probit => {
                    let p = normal::cdf(eta).max(1e-300);
                    let q = normal::cdf(-eta).max(1e-300);
                    d[i] * p.ln() + (1.0 - d[i]) * q.ln()
                }
            }
        })
        .sum();
    ll / n - 0.5 * ridge * beta[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Gradient and (expected) information of [`objective`].
fn derivatives(
    x: &Design,
    d: &[f64],
    beta: &[f64],
    link: Link,
    ridge: f64,
) -> (DVector<f64>, DMatrix<f64>) {
    let (n, p) = (x.nrows(), x.ncols());
    let mut grad = DVector::zeros(p);
    let mut info = DMatrix::zeros(p, p);
    for i in 0..n {
        let row = x.row(i);
        let eta = dot(row, beta);
        let (score, weight) = match link {
            Link::Logit => {
                let m = logistic(eta);
                (d[i] - m, m * (1.0 - m))
            }
            Link::Probit => {
                let m = normal::cdf(eta);
                let v = (m * (1.0 - m)).max(1e-300);
                let phi = normal::pdf(eta);
                (phi * (d[i] - m) / v, phi * phi / v)
            }
        };
        for j in 0..p {
            grad[j] += score * row[j];
            for k in 0..=j {
                info[(j, k)] += weight * row[j] * row[k];
            }
        }
    }
    let nf = n as f64;
    for j in 0..p {
        grad[j] /= nf;
        for k in 0..=j {
            info[(j, k)] /= nf;
            info[(k, j)] = info[(j, k)];
        }
        if j > 0 {
            grad[j] -= ridge * beta[j];
            info[(j, j)] += ridge;
        }
    }
    (grad, info)
}

/// Damped Newton (Fisher scoring for probit). Falls back to the clamped
/// constant fit on empty classes, separation or non-convergence; the flag
/// reports the fallback.
fn fit_binary(x: &Design, d: &[f64], link: Link) -> (Vec<f64>, bool) {
    let p = x.ncols();
    let share = d.iter().sum::<f64>() / d.len() as f64;
    let lo = logistic(-FALLBACK_LOGIT);
    let constant = |s: f64| {
        let mut b = vec![0.0; p];
        b[0] = link.inverse(s.clamp(lo, 1.0 - lo));
        b
    };
    if share == 0.0 || share == 1.0 {
        return (constant(share), true);
    }
    let (beta, converged) = newton(x, d, link, RIDGE, constant(share), SEPARATION_INDEX);
    if converged && !separated(x, d, &beta, link) {
        (beta, false)
    } else {
        (constant(share), true)
    }
}

/// Maximises the ridge-penalised average log-likelihood from `beta`. Stops
/// early once any linear index exceeds `max_index` in absolute value.
/// Returns the last iterate and whether the gradient tolerance was met.
pub(crate) fn newton(
    x: &Design,
    d: &[f64],
    link: Link,
    ridge: f64,
    mut beta: Vec<f64>,
    max_index: f64,
) -> (Vec<f64>, bool) {
    let mut obj = objective(x, d, &beta, link, ridge);
    for _ in 0..MAX_ITER {
        let (grad, info) = derivatives(x, d, &beta, link, ridge);
        if grad.amax() < GRAD_TOL {
            return (beta, true);
        }
        let Ok(step) = solve_spd(info, &grad) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-10 {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + t * s).collect();
            let cand_obj = objective(x, d, &cand, link, ridge);
            if cand_obj >= obj {
                beta = cand;
                obj = cand_obj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || (0..x.nrows()).any(|i| dot(x.row(i), &beta).abs() > max_index) {
            break;
        }
    }
    (beta, false)
}

/// Extreme linear index, or every observation classified with near
/// certainty (the ridge keeps separated fits finite).
fn separated(x: &Design, d: &[f64], beta: &[f64], link: Link) -> bool {
    let etas: Vec<f64> = (0..x.nrows()).map(|i| dot(x.row(i), beta)).collect();
    etas.iter().any(|e| e.abs() > SEPARATION_INDEX)
        || etas
            .iter()
            .zip(d)
            .all(|(e, di)| (di - link.cdf(*e)).abs() < SEPARATION_FIT)
}
