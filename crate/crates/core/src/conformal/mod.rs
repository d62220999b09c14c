//! Distributional conformal prediction engines.
//!
//! Observations are mapped to their estimated conditional ranks
//! `U = F(Y | X)`; a conformity score of the rank is calibrated either on
//! the full augmented sample ([`full_dcp`]) or on a held-out calibration
//! split ([`split_dcp_fit`] / [`split_dcp_predict`]).

mod full;
mod score;
mod shape;
mod split;

pub use full::{full_dcp, p_value, FullDcpResult};
pub use score::{score_baseline, score_optimal, ConformityScore, ScoreKind};
pub use shape::{estimate_b, estimate_b_at, DEFAULT_Z_STEPS};
pub use split::{calibrate, split_dcp_fit, split_dcp_predict, Split, SplitModel};
