//! Finite-sample conformal quantile.

use crate::data::Alpha;
use crate::error::{invalid, Result};

/// Rank `k = ceil((1 - alpha)(n + 1))` of the order statistic used as the
/// conformal threshold for `n` calibration scores. May exceed `n`.
pub fn conformal_rank(n: usize, alpha: Alpha) -> usize {
    // Guard the ceiling against representation error, e.g. 0.9 * 100.
    let raw = alpha.level() * (n as f64 + 1.0);
    let k = (raw - 1e-9).ceil();
    k.max(1.0) as usize
}

/// The `ceil((1 - alpha)(n + 1))`-th smallest value, or `+inf` when that
/// rank exceeds the sample size.
pub fn conformal_quantile(values: &[f64], alpha: Alpha) -> Result<f64> {
    if values.is_empty() {
        return invalid("conformal quantile of an empty sample");
    }
    if values.iter().any(|v| v.is_nan()) {
        return invalid("conformal quantile of NaN scores");
    }
    let k = conformal_rank(values.len(), alpha);
    if k > values.len() {
        return Ok(f64::INFINITY);
    }
    let mut sorted = values.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn documented_examples() {
        let v: Vec<f64> = (1..=99).map(f64::from).collect();
        assert_eq!(conformal_quantile(&v, a(0.1)).unwrap(), 90.0);
        assert_eq!(
            conformal_quantile(&[1.0, 2.0, 3.0], a(0.1)).unwrap(),
            f64::INFINITY
        );
        assert_eq!(conformal_quantile(&[5.0], a(0.4)).unwrap(), f64::INFINITY);
        assert!(conformal_quantile(&[], a(0.1)).is_err());
    }

    #[test]
    fn rank_matches_exact_rational_ceiling() {
        // alpha = i / 1000 keeps (1 - alpha)(n + 1) rational; compare with
        // integer arithmetic.
        for n in 1..300usize {
            for i in [1u64, 5, 10, 50, 100, 250, 500, 900] {
                let exact = ((1000 - i) * (n as u64 + 1)).div_ceil(1000) as usize;
                assert_eq!(conformal_rank(n, a(i as f64 / 1000.0)), exact.max(1));
            }
        }
    }

    proptest! {
        #[test]
        fn monotone_in_alpha(values in prop::collection::vec(-100.0f64..100.0, 1..60),
                             a1 in 0.01f64..0.99, a2 in 0.01f64..0.99) {
            let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
            let q_lo = conformal_quantile(&values, a(lo)).unwrap();
            let q_hi = conformal_quantile(&values, a(hi)).unwrap();
            prop_assert!(q_lo >= q_hi);
        }

        #[test]
        fn dominates_plain_empirical_quantile(values in prop::collection::vec(-100.0f64..100.0, 1..60),
                                              alpha in 0.01f64..0.99) {
            let n = values.len();
            let k = ((1.0 - alpha) * n as f64).ceil().max(1.0) as usize;
            let mut s = values.clone();
            s.sort_by(f64::total_cmp);
            let plain = s[k.min(n) - 1];
            prop_assert!(conformal_quantile(&values, a(alpha)).unwrap() >= plain);
        }
    }
}
