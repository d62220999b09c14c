//! Prediction sets reported as closed intervals.

use serde::{Deserialize, Serialize};

/// Closed prediction interval `[lower, upper]`.
///
/// `unbounded` marks sets that are the whole line in principle (the
/// calibrated threshold was the `+inf` sentinel); the finite `lower`/`upper`
/// then hold the trial-grid hull. Full DCP keeps the accepted grid points in
/// `raw_members`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub unbounded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_members: Option<Vec<f64>>,
}

impl IntervalSet {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper, "interval [{lower}, {upper}] is reversed");
        IntervalSet {
            lower,
            upper,
            unbounded: false,
            raw_members: None,
        }
    }

    /// Whole-line set reported over a finite hull.
    pub fn unbounded(hull_lower: f64, hull_upper: f64) -> Self {
        IntervalSet {
            lower: hull_lower,
            upper: hull_upper,
            unbounded: true,
            raw_members: None,
        }
    }

    /// Closed hull of a non-empty set of accepted points.
    pub fn hull_of(members: Vec<f64>) -> Option<Self> {
        let lower = members.iter().copied().reduce(f64::min)?;
        let upper = members.iter().copied().reduce(f64::max)?;
        Some(IntervalSet {
            lower,
            upper,
            unbounded: false,
            raw_members: Some(members),
        })
    }

    pub fn contains(&self, y: f64) -> bool {
        self.unbounded || (self.lower <= y && y <= self.upper)
    }

    /// Length of the interval; infinite for unbounded sets.
    pub fn length(&self) -> f64 {
        if self.unbounded {
            f64::INFINITY
        } else {
            self.upper - self.lower
        }
    }
}
