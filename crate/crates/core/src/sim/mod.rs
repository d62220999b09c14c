//! Simulated data and analytic oracle intervals.
//!
//! - `location_scale`: `X ~ U(0, 1)`, `Y = X + X e`, `e ~ N(0, 1)`.
//! - `skewed_exponential`: `X ~ U(0.5, 1.5)`, `Y | X ~ X Exp(1)`.
//! - `ar_garch_like`: GARCH(1, 1) returns with the lagged 22-day realized
//!   volatility as predictor.
//!
//! Normal draws push a 53-bit uniform in (0, 1) through
//! [`crate::normal::quantile`], and exponential draws use `-ln(1 - U)`, so a
//! seed fixes the data exactly.

mod dgp;
mod oracle;
mod volatility;

pub use dgp::{generate, Dgp, DgpKind, GarchParams};
pub use oracle::{
    mean_oracle_coverage, mean_oracle_half_width, oracle_dcp_interval, oracle_mean_interval,
    skewed_oracle_lengths,
};
pub use volatility::{realized_volatility, RV_WINDOW};
