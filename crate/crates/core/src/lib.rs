//! Distributional conformal prediction.
//!
//! Prediction intervals are obtained by estimating the conditional CDF of the
//! outcome (quantile regression process, distribution regression or a
//! Gaussian linear model), turning each observation into its estimated
//! conditional rank, and calibrating a conformity score on those ranks.
//!
//! The crate is organised as
//!
//! - [`data`], [`grid`], [`interval`], [`quantile`]: shared containers and the
//!   finite-sample conformal quantile convention,
//! - [`regress`]: conditional CDF estimators and monotone rearrangement,
//! - [`conformal`]: full and split DCP, conformity scores and the shape
//!   adjustment used by the optimal score,
//! - [`baselines`]: CQR, CQR-m, CQR-r, CP-OLS and CP-loc comparators,
//! - [`eval`]: coverage metrics and the holdout / rolling evaluation protocols,
//! - [`sim`]: data-generating processes and analytic oracle intervals.

pub mod baselines;
pub mod conformal;
pub mod data;
pub mod error;
pub mod eval;
pub mod grid;
pub mod interval;
pub mod normal;
pub mod quantile;
pub mod regress;
pub mod sim;

pub use data::{Alpha, Dataset};
pub use error::{Error, Result};
pub use grid::{TauGrid, TrialGrid};
pub use interval::IntervalSet;
pub use quantile::conformal_quantile;
