//! Coverage metrics, conditional-coverage diagnostics and the holdout and
//! rolling evaluation protocols.

mod binned;
mod dispersion;
mod methods;
mod metrics;
mod protocol;

pub use binned::{binned_coverage, quantile_edges, Bin};
pub use dispersion::{coverage_dispersion, Dispersion};
pub use methods::{run_method, Method, MethodConfig};
pub use metrics::{cover_indicators, coverage_metrics, CoverageSummary};
pub use protocol::{
    coverage_report, holdout_eval, holdout_split, rolling_ts_eval, rolling_windows, CoverageReport,
    RollingReport, Window,
};
