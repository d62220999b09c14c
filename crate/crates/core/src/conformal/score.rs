use serde::{Deserialize, Serialize};

use crate::conformal::shape::{estimate_b, DEFAULT_Z_STEPS};
use crate::data::Alpha;
use crate::error::Result;
use crate::regress::ConditionalDistribution;

/// `|u - 1/2|`, with `u` clamped to [0, 1].
pub fn score_baseline(u: f64) -> f64 {
    (u.clamp(0.0, 1.0) - 0.5).abs()
}

/// `|u - b - (1 - alpha) / 2|`, with `u` clamped to [0, 1].
pub fn score_optimal(u: f64, b: f64, alpha: Alpha) -> f64 {
    (u.clamp(0.0, 1.0) - b - 0.5 * alpha.level()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Baseline,
    Optimal,
}

/// Conformity score of a conditional rank. The optimal score re-centres the
/// rank at `b(x, alpha) + (1 - alpha) / 2`, where `b` is estimated from the
/// same conditional distribution that produced the rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformityScore {
    pub kind: ScoreKind,
    pub alpha: Alpha,
    /// Number of steps of the grid `{0, alpha / m, ..., alpha}` searched for
    /// `b`.
    pub z_steps: usize,
}

impl ConformityScore {
    pub fn new(kind: ScoreKind, alpha: Alpha) -> Self {
        ConformityScore {
            kind,
            alpha,
            z_steps: DEFAULT_Z_STEPS,
        }
    }

    /// Rank at which the score is zero.
    pub fn center(&self, dist: &dyn ConditionalDistribution) -> Result<f64> {
        Ok(match self.kind {
            ScoreKind::Baseline => 0.5,
            ScoreKind::Optimal => {
                let z_step = self.alpha.value() / self.z_steps as f64;
                estimate_b(dist, self.alpha, z_step)? + 0.5 * self.alpha.level()
            }
        })
    }

    /// Score of outcome `y` under `dist`.
    pub fn score(&self, dist: &dyn ConditionalDistribution, y: f64) -> Result<f64> {
        let u = dist.cdf(y).clamp(0.0, 1.0);
        Ok((u - self.center(dist)?).abs())
    }
}
