use crate::error::{invalid, Result};

/// Trading days in the realized-volatility window.
pub const RV_WINDOW: usize = 22;

/// `rv_t = sqrt(sum_{i = t - w}^{t - 1} r_i^2)`, aligned with `returns`: entry
/// `t` only uses returns before `t`, so it is the lagged volatility available
/// when `r_t` is predicted. The first `w` entries are `None`.
pub fn realized_volatility(returns: &[f64], window: usize) -> Result<Vec<Option<f64>>> {
    if window == 0 {
        return invalid("realized-volatility window must be positive");
    }
    if returns.len() < window + 1 {
        return invalid(format!(
            "need at least {} returns for a {window}-day window, got {}",
            window + 1,
            returns.len()
        ));
    }
    let mut out = vec![None; window];
    out.extend((window..returns.len()).map(|t| {
        let ss: f64 = returns[t - window..t].iter().map(|r| r * r).sum();
        Some(ss.sqrt())
    }));
    Ok(out)
}
