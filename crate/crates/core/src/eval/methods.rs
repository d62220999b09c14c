use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{baseline_fit, BaselineMethod};
use crate::conformal::{full_dcp, split_dcp_fit, split_dcp_predict, ScoreKind, Split};
use crate::data::{Alpha, Dataset};
use crate::error::{invalid, Error, Result};
use crate::grid::{make_trial_grid, TauGrid, DEFAULT_TRIAL_POINTS};
use crate::interval::IntervalSet;
use crate::regress::{Estimator, Link, Thresholds};

/// Every prediction method that can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DcpQr,
    DcpQrOpt,
    DcpDr,
    DcpFull,
    Cqr,
    CqrM,
    CqrR,
    CpOls,
    CpLoc,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::DcpQr,
        Method::DcpQrOpt,
        Method::DcpDr,
        Method::DcpFull,
        Method::Cqr,
        Method::CqrM,
        Method::CqrR,
        Method::CpOls,
        Method::CpLoc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::DcpQr => "dcp-qr",
            Method::DcpQrOpt => "dcp-qr-opt",
            Method::DcpDr => "dcp-dr",
            Method::DcpFull => "dcp-full",
            Method::Cqr => "cqr",
            Method::CqrM => "cqr-m",
            Method::CqrR => "cqr-r",
            Method::CpOls => "cp-ols",
            Method::CpLoc => "cp-loc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// Method plus the tuning it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub alpha: Alpha,
    /// Fraction of the training rows used for fitting; the rest calibrate.
    pub split_frac: f64,
    /// Seed of the random fit/calibration split (ignored for time-ordered
    /// data, which is split contiguously).
    pub seed: u64,
    pub tau_grid: TauGrid,
    pub trial_points: usize,
    pub thresholds: Thresholds,
    pub link: Link,
}

impl MethodConfig {
    pub fn new(method: Method, alpha: Alpha) -> Self {
        MethodConfig {
            method,
            alpha,
            split_frac: 0.5,
            seed: 0,
            tau_grid: TauGrid::default(),
            trial_points: DEFAULT_TRIAL_POINTS,
            thresholds: Thresholds::default(),
            link: Link::Logit,
        }
    }

    fn split(&self) -> Split {
        Split::random(self.split_frac, self.seed)
    }
}

/// Fits `config.method` on `train` and predicts an interval for every row of
/// `test`.
pub fn run_method(config: &MethodConfig, train: &Dataset, test: &Dataset) -> Result<Vec<IntervalSet>> {
    if test.n_features() != train.n_features() {
        return invalid("training and test data have different predictor counts");
    }
    let qr = Estimator::Qr {
        grid: config.tau_grid.clone(),
    };
    let dcp = |estimator: &Estimator, kind: ScoreKind| -> Result<Vec<IntervalSet>> {
        let model = split_dcp_fit(train, config.split(), config.alpha, estimator, kind)?;
        let grid = make_trial_grid(train, config.trial_points)?;
        test.rows()
            .map(|x| split_dcp_predict(&model, x, &grid))
            .collect()
    };
    let baseline = |method: BaselineMethod| -> Result<Vec<IntervalSet>> {
        let model = baseline_fit(train, config.split(), config.alpha, method)?;
        test.rows().map(|x| model.predict(x)).collect()
    };
    match config.method {
        Method::DcpQr => dcp(&qr, ScoreKind::Baseline),
        Method::DcpQrOpt => dcp(&qr, ScoreKind::Optimal),
        Method::DcpDr => dcp(
            &Estimator::Dr {
                thresholds: config.thresholds.clone(),
                link: config.link,
            },
            ScoreKind::Baseline,
        ),
        Method::DcpFull => {
            let grid = make_trial_grid(train, config.trial_points)?;
            test.rows()
                .map(|x| {
                    full_dcp(train, x, config.alpha, &qr, &grid)?
                        .accepted
                        .ok_or_else(|| Error::Numeric("full DCP accepted no trial value".into()))
                })
                .collect()
        }
        Method::Cqr => baseline(BaselineMethod::Cqr),
        Method::CqrM => baseline(BaselineMethod::CqrM),
        Method::CqrR => baseline(BaselineMethod::CqrR),
        Method::CpOls => baseline(BaselineMethod::CpOls),
        Method::CpLoc => baseline(BaselineMethod::CpLoc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("dcp".parse::<Method>().is_err());
    }
}
