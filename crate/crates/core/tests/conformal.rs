use dcp::conformal::{full_dcp, p_value, split_dcp_fit, split_dcp_predict, ScoreKind, Split};
use dcp::grid::make_trial_grid;
use dcp::regress::Estimator;
use dcp::sim::{generate, Dgp, DgpKind};
use dcp::{normal, Alpha, Dataset, TrialGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

/// Simple linear regression by the closed-form formulas.
fn simple_ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (intercept, slope, (rss / n).sqrt())
}

fn kth(mut v: Vec<f64>, a: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = ((1.0 - a) * (v.len() as f64 + 1.0) - 1e-9).ceil() as usize;
    v.get(k - 1).copied().unwrap_or(f64::INFINITY)
}

#[test]
fn gaussian_split_dcp_matches_hand_computation() {
    let data = generate(&Dgp::new(DgpKind::LocationScale, 17), 300).unwrap();
    let a = 0.1;
    let model = split_dcp_fit(
        &data,
        Split::contiguous(0.5),
        alpha(a),
        &Estimator::Gaussian,
        ScoreKind::Baseline,
    )
    .unwrap();
    let x = data.column(0);
    let y = data.y();
    let (b0, b1, sd) = simple_ols(&x[..150], &y[..150]);
    let scores: Vec<f64> = (150..300)
        .map(|i| (normal::cdf((y[i] - b0 - b1 * x[i]) / sd) - 0.5).abs())
        .collect();
    let q = kth(scores, a);
    assert!((model.threshold - q).abs() < 1e-12);

    let grid = make_trial_grid(&data, 100).unwrap();
    for xv in [0.05, 0.5, 0.95] {
        let m = b0 + b1 * xv;
        let int = split_dcp_predict(&model, &[xv], &grid).unwrap();
        assert!((int.lower - (m + sd * normal::quantile(0.5 - q))).abs() < 1e-9);
        assert!((int.upper - (m + sd * normal::quantile(0.5 + q))).abs() < 1e-9);
    }

    // A symmetric conditional law leaves the optimal interval unchanged.
    let opt = split_dcp_fit(
        &data,
        Split::contiguous(0.5),
        alpha(a),
        &Estimator::Gaussian,
        ScoreKind::Optimal,
    )
    .unwrap();
    for xv in [0.1, 0.7] {
        let i1 = split_dcp_predict(&model, &[xv], &grid).unwrap();
        let i2 = split_dcp_predict(&opt, &[xv], &grid).unwrap();
        assert!((i1.lower - i2.lower).abs() < 1e-9 && (i1.upper - i2.upper).abs() < 1e-9);
    }
}

#[test]
fn split_dcp_marginal_coverage() {
    let a = alpha(0.2);
    let reps = 400;
    let mut hits = 0;
    for r in 0..reps {
        let data = generate(&Dgp::new(DgpKind::SkewedExponential, 3).with_stream(r), 62).unwrap();
        let train = data.slice(0, 60).unwrap();
        let m = split_dcp_fit(&train, Split::random(0.5, r), a, &Estimator::default(), ScoreKind::Optimal)
            .unwrap();
        let grid = make_trial_grid(&train, 200).unwrap();
        hits += usize::from(
            split_dcp_predict(&m, data.row(60), &grid)
                .unwrap()
                .contains(data.y()[60]),
        );
    }
    let cov = hits as f64 / reps as f64;
    // 0.8 minus three binomial standard errors.
    assert!(cov >= 0.8 - 3.0 * (0.16f64 / reps as f64).sqrt(), "{cov}");
}

#[test]
fn full_dcp_covers_the_true_outcome() {
    // The true outcome is placed on the grid, so the rank test is exact.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = 0.2;
    let reps = 300;
    let mut hits = 0;
    for _ in 0..reps {
        let z: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = Dataset::outcomes_only(z[..9].to_vec()).unwrap();
        let mut g: Vec<f64> = (0..21).map(|i| -2.0 + 0.2 * f64::from(i)).collect();
        g.push(z[9]);
        g.sort_by(f64::total_cmp);
        g.dedup();
        let grid = TrialGrid::new(g).unwrap();
        let r = full_dcp(&data, &[], alpha(a), &Estimator::default(), &grid).unwrap();
        let idx = r.grid.iter().position(|v| *v == z[9]).unwrap();
        hits += usize::from(r.p_values[idx].unwrap() > a);
    }
    let cov = hits as f64 / reps as f64;
    assert!(cov >= 0.8 - 3.0 * (0.16f64 / reps as f64).sqrt(), "{cov}");
}

#[test]
fn full_dcp_with_predictors_accepts_a_band_around_the_fit() {
    let data = generate(&Dgp::new(DgpKind::LocationScale, 21), 20).unwrap();
    let grid = make_trial_grid(&data, 60).unwrap();
    let r = full_dcp(&data, &[0.5], alpha(0.2), &Estimator::default(), &grid).unwrap();
    let set = r.accepted.expect("non-empty set");
    assert!(set.lower < 0.5 && set.upper > 0.5);
    assert!(r.p_values.iter().flatten().all(|p| *p > 0.0 && *p <= 1.0));
    assert!(full_dcp(&data, &[0.5, 1.0], alpha(0.2), &Estimator::default(), &grid).is_err());
}

proptest! {
    #[test]
    fn p_value_counts_scores_at_least_the_last(scores in prop::collection::vec(0u8..6, 1..40)) {
        let s: Vec<f64> = scores.iter().map(|v| f64::from(*v)).collect();
        let last = s[s.len() - 1];
        let expected = s.iter().filter(|v| **v >= last).count() as f64 / s.len() as f64;
        prop_assert_eq!(p_value(&s).unwrap(), expected);
    }

    #[test]
    fn larger_alpha_gives_shorter_split_intervals(seed in 0u64..50) {
        let data = generate(&Dgp::new(DgpKind::LocationScale, seed), 200).unwrap();
        let grid = make_trial_grid(&data, 200).unwrap();
        let fit = |a| split_dcp_fit(&data, Split::contiguous(0.5), alpha(a), &Estimator::Gaussian, ScoreKind::Baseline).unwrap();
        let (wide, narrow) = (fit(0.1), fit(0.3));
        for x in [0.2, 0.8] {
            let w = split_dcp_predict(&wide, &[x], &grid).unwrap();
            let n = split_dcp_predict(&narrow, &[x], &grid).unwrap();
            prop_assert!(w.lower <= n.lower && n.upper <= w.upper);
        }
    }
}
