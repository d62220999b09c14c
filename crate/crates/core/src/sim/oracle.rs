use crate::data::Alpha;
use crate::error::{invalid, Result};
use crate::interval::IntervalSet;
use crate::normal;

/// Conditionally exact interval for the location-scale process:
/// `[x - x q, x + x q]` with `q = Phi^{-1}(1 - alpha / 2)`.
pub fn oracle_dcp_interval(x: f64, alpha: Alpha) -> Result<IntervalSet> {
    if !(x > 0.0 && x < 1.0) {
        return invalid(format!("x must lie in (0, 1), got {x}"));
    }
    let q = normal::quantile(1.0 - alpha.value() / 2.0);
    Ok(IntervalSet::new(x - x * q, x + x * q))
}

/// Conditional coverage `2 Phi(q / x) - 1` of `[x - q, x + q]` under the
/// location-scale process.
pub fn mean_oracle_coverage(x: f64, q: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    2.0 * normal::cdf(q / x) - 1.0
}

fn average_coverage(q: f64) -> f64 {
    // Composite Simpson on [0, 1]; the integrand tends to 1 at x = 0.
    const N: usize = 2000;
    let h = 1.0 / N as f64;
    let mut s = mean_oracle_coverage(0.0, q) + mean_oracle_coverage(1.0, q);
    for i in 1..N {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * mean_oracle_coverage(i as f64 * h, q);
    }
    s * h / 3.0
}

/// Half-width `q_R` of the fixed-width interval with unconditional coverage
/// `1 - alpha`: root of `int_0^1 (2 Phi(q / x) - 1) dx = 1 - alpha`.
pub fn mean_oracle_half_width(alpha: Alpha) -> f64 {
    let target = alpha.level();
    let (mut lo, mut hi) = (0.0, normal::quantile(1.0 - alpha.value() / 2.0));
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if average_coverage(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `[x - q_R, x + q_R]`: the interval built from the absolute residual of
/// the true conditional mean.
pub fn oracle_mean_interval(x: f64, alpha: Alpha) -> IntervalSet {
    let q = mean_oracle_half_width(alpha);
    IntervalSet::new(x - q, x + q)
}

/// Oracle interval lengths per unit of `x` for `Y | X ~ X Exp(1)`: the
/// equal-tailed interval and the shortest one.
pub fn skewed_oracle_lengths(alpha: Alpha) -> (f64, f64) {
    let q = |p: f64| -(1.0 - p).ln();
    let a = alpha.value();
    (q(1.0 - a / 2.0) - q(a / 2.0), q(1.0 - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Alpha {
        Alpha::new(0.1).unwrap()
    }

    #[test]
    fn dcp_oracle_at_half() {
        let i = oracle_dcp_interval(0.5, a()).unwrap();
        assert!((i.lower + 0.322_4).abs() < 1e-4 && (i.upper - 1.322_4).abs() < 1e-4);
        assert!(oracle_dcp_interval(1e-9, a()).unwrap().length() < 1e-8);
        assert!(oracle_dcp_interval(1.5, a()).is_err());
    }

    #[test]
    fn mean_oracle_solves_its_equation() {
        let q = mean_oracle_half_width(a());
        assert!((average_coverage(q) - 0.9).abs() < 1e-9);
        assert!(mean_oracle_coverage(0.1, q) > 0.9 && mean_oracle_coverage(1.0, q) < 0.9);
        let i = oracle_mean_interval(0.3, a());
        assert!((i.length() - oracle_mean_interval(0.8, a()).length()).abs() < 1e-15);
        assert!(mean_oracle_half_width(Alpha::new(0.999).unwrap()) < 0.01);
    }

    #[test]
    fn quadrature_matches_midpoint_rule() {
        let q = 0.9;
        let n = 200_000;
        let mid: f64 = (0..n)
            .map(|i| mean_oracle_coverage((i as f64 + 0.5) / n as f64, q))
            .sum::<f64>()
            / n as f64;
        assert!((average_coverage(q) - mid).abs() < 1e-8);
    }

    #[test]
    fn skewed_lengths() {
        let (b, o) = skewed_oracle_lengths(a());
        assert!((b - 2.944_4).abs() < 1e-4 && (o - std::f64::consts::LN_10).abs() < 1e-12);
    }
}
