//! Outcome/predictor containers and the miscoverage level.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Miscoverage level, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            invalid(format!("alpha must lie in (0, 1), got {value}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Nominal coverage `1 - alpha`.
    pub fn level(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = crate::Error;

    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// A sample `{(y_t, x_t)}` with `x` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<f64>,
    p: usize,
    time_ordered: bool,
}

impl Dataset {
    /// Builds a dataset from outcomes and predictor rows. Every row must have
    /// the same length; zero predictors is allowed (intercept-only models).
    pub fn new(y: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if y.len() != rows.len() {
            return invalid(format!(
                "outcome length {} does not match {} predictor rows",
                y.len(),
                rows.len()
            ));
        }
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return invalid("predictor rows have inconsistent lengths");
        }
        let x = rows.into_iter().flatten().collect();
        Self::from_flat(y, x, p)
    }

    /// Builds a dataset from a row-major predictor buffer of `y.len() * p` values.
    pub fn from_flat(y: Vec<f64>, x: Vec<f64>, p: usize) -> Result<Self> {
        if y.len() < 2 {
            return invalid(format!("a dataset needs at least 2 rows, got {}", y.len()));
        }
        if x.len() != y.len() * p {
            return invalid("predictor buffer size does not match rows * columns");
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return invalid("dataset contains non-finite values");
        }
        Ok(Dataset {
            y,
            x,
            p,
            time_ordered: false,
        })
    }

    /// Intercept-only sample: no predictor columns.
    pub fn outcomes_only(y: Vec<f64>) -> Result<Self> {
        Self::from_flat(y, Vec::new(), 0)
    }

    pub fn with_time_order(mut self, time_ordered: bool) -> Self {
        self.time_ordered = time_ordered;
        self
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Number of predictor columns (excluding any intercept).
    pub fn n_features(&self) -> usize {
        self.p
    }

    pub fn time_ordered(&self) -> bool {
        self.time_ordered
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    /// Values of predictor column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.x[i * self.p + j]).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// Rows at `indices`, in the given order. Keeps the time-order flag.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let y = indices.iter().map(|&i| self.y[i]).collect();
        let x = indices
            .iter()
            .flat_map(|&i| self.row(i).iter().copied())
            .collect();
        Ok(Self::from_flat(y, x, self.p)?.with_time_order(self.time_ordered))
    }

    /// Contiguous rows `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        let idx: Vec<usize> = (start..end).collect();
        self.subset(&idx)
    }

    /// Appends one observation; used to build augmented samples.
    pub fn augmented(&self, y: f64, x: &[f64]) -> Result<Self> {
        if x.len() != self.p {
            return invalid(format!(
                "query has {} predictors, dataset has {}",
                x.len(),
                self.p
            ));
        }
        let mut out = self.clone();
        out.y.push(y);
        out.x.extend_from_slice(x);
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return invalid("augmented point is not finite");
        }
        Ok(out)
    }

    /// Row order sorted by `y`, then by `x` lexicographically. Estimators fit
    /// on this order so that results do not depend on how rows were shuffled.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.y[a].total_cmp(&self.y[b]).then_with(|| {
                self.row(a)
                    .iter()
                    .zip(self.row(b))
                    .map(|(u, v)| u.total_cmp(v))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
        });
        idx
    }

    /// Design matrix over the canonical row order, optionally with a leading
    /// intercept column, together with the matching outcomes.
    pub fn canonical_design(&self, intercept: bool) -> (Design, Vec<f64>) {
        let order = self.canonical_order();
        let cols = self.p + usize::from(intercept);
        let mut data = Vec::with_capacity(order.len() * cols);
        for &i in &order {
            if intercept {
                data.push(1.0);
            }
            data.extend_from_slice(self.row(i));
        }
        let y = order.iter().map(|&i| self.y[i]).collect();
        (
            Design {
                rows: order.len(),
                cols,
                data,
            },
            y,
        )
    }

    /// Largest absolute outcome.
    pub fn max_abs_y(&self) -> f64 {
        self.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Dense row-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("design rows have inconsistent lengths");
        }
        Ok(Design {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Feature vector of a query point as seen by a fitted model.
pub(crate) fn features(x: &[f64], intercept: bool) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + 1);
    if intercept {
        v.push(1.0);
    }
    v.extend_from_slice(x);
    v
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}
