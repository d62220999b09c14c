//! Quantile-level and trial-outcome grids.

use crate::data::Dataset;
use crate::error::{invalid, Result};

pub const DEFAULT_TAU_POINTS: usize = 999;
pub const DEFAULT_TAU_TRIM: f64 = 0.001;
pub const DEFAULT_TRIAL_POINTS: usize = 1000;

/// Equally spaced quantile levels `c, c + step, ..., 1 - c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauGrid {
    taus: Vec<f64>,
    trim: f64,
    step: f64,
}

impl TauGrid {
    pub fn new(n_points: usize, trim: f64) -> Result<Self> {
        if !(trim > 0.0 && trim < 0.5) {
            return invalid(format!("tau trim must lie in (0, 0.5), got {trim}"));
        }
        match n_points {
            0 => invalid("tau grid must not be empty"),
            1 => TauGrid::from_levels(vec![0.5]),
            n => {
                let step = (1.0 - 2.0 * trim) / (n - 1) as f64;
                let taus = (0..n).map(|i| trim + i as f64 * step).collect();
                Ok(TauGrid { taus, trim, step })
            }
        }
    }

    /// Grid with explicit levels. Used for single levels or hand-built grids;
    /// the Riemann weights of the implied CDF are taken as `1 / len`.
    pub fn from_levels(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return invalid("tau grid must not be empty");
        }
        if taus.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return invalid("tau levels must lie in (0, 1)");
        }
        if taus.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("tau levels must be strictly increasing");
        }
        let step = 1.0 / taus.len() as f64;
        Ok(TauGrid {
            trim: 0.0,
            step,
            taus,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Mass assigned below the first level.
    pub fn trim(&self) -> f64 {
        self.trim
    }

    /// Riemann weight of each grid level.
    pub fn step(&self) -> f64 {
        self.step
    }
}

impl Default for TauGrid {
    fn default() -> Self {
        TauGrid::new(DEFAULT_TAU_POINTS, DEFAULT_TAU_TRIM).expect("default tau grid")
    }
}

/// Strictly increasing candidate outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialGrid {
    values: Vec<f64>,
}

impl TrialGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("trial grid must not be empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("trial grid values must be finite");
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("trial grid must be strictly increasing");
        }
        Ok(TrialGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// `n_points` equally spaced values spanning `[-M, M]`, `M = max_t |y_t|`.
pub fn make_trial_grid(data: &Dataset, n_points: usize) -> Result<TrialGrid> {
    symmetric_grid(data.max_abs_y(), n_points)
}

pub(crate) fn symmetric_grid(m: f64, n_points: usize) -> Result<TrialGrid> {
    if n_points < 2 {
        return invalid(format!("trial grid needs at least 2 points, got {n_points}"));
    }
    if !(m > 0.0) {
        return invalid("trial grid has zero width: all outcomes are zero");
    }
    let n = n_points - 1;
    // Mirror the lower half so the grid is exactly symmetric and hits +-M.
    let values = (0..n_points)
        .map(|i| {
            if 2 * i <= n {
                -m + 2.0 * m * i as f64 / n as f64
            } else {
                m - 2.0 * m * (n - i) as f64 / n as f64
            }
        })
        .collect();
    TrialGrid::new(values)
}
