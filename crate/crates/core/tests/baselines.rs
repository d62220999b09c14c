use dcp::baselines::{baseline_fit, cp_mean_fit, cqr_fit, BaselineMethod, CqrVariant};
use dcp::conformal::Split;
use dcp::sim::{generate, Dgp, DgpKind};
use dcp::{Alpha, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

fn kth(mut v: Vec<f64>, a: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = ((1.0 - a) * (v.len() as f64 + 1.0) - 1e-9).ceil() as usize;
    v.get(k - 1).copied().unwrap_or(f64::INFINITY)
}

/// Sample quantile `y_(ceil(n tau))`, the intercept-only QR solution.
fn order_stat(y: &[f64], tau: f64) -> f64 {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let r = (s.len() as f64 * tau - 1e-9).ceil().max(1.0) as usize;
    s[r - 1]
}

#[test]
fn cp_ols_matches_closed_form() {
    let data = generate(&Dgp::new(DgpKind::LocationScale, 4), 120).unwrap();
    let a = 0.1;
    let m = cp_mean_fit(&data, Split::contiguous(0.5), alpha(a), false).unwrap();
    let (x, y) = (data.column(0), data.y());
    let n = 60.0;
    let mx = x[..60].iter().sum::<f64>() / n;
    let my = y[..60].iter().sum::<f64>() / n;
    let slope = x[..60].iter().zip(&y[..60]).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x[..60].iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    let icpt = my - slope * mx;
    let q = kth((60..120).map(|i| (y[i] - icpt - slope * x[i]).abs()).collect(), a);
    assert!((m.threshold - q).abs() < 1e-12);
    let int = m.predict(&[0.4]).unwrap();
    assert!((int.lower - (icpt + slope * 0.4 - q)).abs() < 1e-10);
    assert!((int.upper - (icpt + slope * 0.4 + q)).abs() < 1e-10);
    assert_eq!(m.split_sizes, (60, 60));
}

#[test]
fn intercept_only_cqr_family_matches_order_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let y: Vec<f64> = (0..41).map(|_| rng.gen_range(-2.0..3.0)).collect();
    let data = Dataset::outcomes_only(y.clone()).unwrap();
    let a = 0.2;
    let fit = &y[..21];
    let cal = &y[21..];
    let lo = order_stat(fit, a / 2.0);
    let hi = order_stat(fit, 1.0 - a / 2.0);
    let mid = order_stat(fit, 0.5);

    let plain = cqr_fit(&data, Split::contiguous(0.5), alpha(a), CqrVariant::Plain).unwrap();
    let q = kth(cal.iter().map(|v| (lo - v).max(v - hi)).collect(), a);
    assert_eq!(plain.threshold, q);
    let i = plain.predict(&[]).unwrap();
    assert!((i.lower - (lo - q)).abs() < 1e-12 && (i.upper - (hi + q)).abs() < 1e-12);

    let rel = cqr_fit(&data, Split::contiguous(0.5), alpha(a), CqrVariant::Relative).unwrap();
    let w = hi - lo;
    let q = kth(cal.iter().map(|v| (lo - v).max(v - hi) / w).collect(), a);
    assert!((rel.threshold - q).abs() < 1e-12);
    let i = rel.predict(&[]).unwrap();
    assert!((i.lower - (lo - q * w)).abs() < 1e-12 && (i.upper - (hi + q * w)).abs() < 1e-12);

    let med = cqr_fit(&data, Split::contiguous(0.5), alpha(a), CqrVariant::Median).unwrap();
    let q = kth(
        cal.iter()
            .map(|v| ((lo - v) / (mid - lo)).max((v - hi) / (hi - mid)))
            .collect(),
        a,
    );
    assert!((med.threshold - q).abs() < 1e-12);
    let i = med.predict(&[]).unwrap();
    assert!((i.lower - (lo - q * (mid - lo))).abs() < 1e-12);
    assert!((i.upper - (hi + q * (hi - mid))).abs() < 1e-12);
}

#[test]
fn all_baselines_cover_marginally() {
    let a = alpha(0.1);
    let reps = 400;
    for method in [
        BaselineMethod::Cqr,
        BaselineMethod::CqrM,
        BaselineMethod::CqrR,
        BaselineMethod::CpOls,
        BaselineMethod::CpLoc,
    ] {
        let mut hits = 0;
        for r in 0..reps {
            let data = generate(&Dgp::new(DgpKind::LocationScale, 12).with_stream(r), 102).unwrap();
            let train = data.slice(0, 100).unwrap();
            let m = baseline_fit(&train, Split::random(0.5, r), a, method).unwrap();
            hits += usize::from(m.predict(data.row(100)).unwrap().contains(data.y()[100]));
        }
        let cov = hits as f64 / reps as f64;
        assert!(cov >= 0.9 - 3.0 * (0.09f64 / reps as f64).sqrt(), "{method:?}: {cov}");
    }
}

#[test]
fn tiny_calibration_gives_whole_line() {
    let data = Dataset::outcomes_only((0..20).map(f64::from).collect()).unwrap();
    let m = cp_mean_fit(&data, Split::contiguous(0.5), alpha(0.05), false).unwrap();
    assert_eq!(m.threshold, f64::INFINITY);
    let i = m.predict(&[]).unwrap();
    assert!(i.unbounded && i.contains(1e300) && i.contains(-1e300));
}

#[test]
fn rejects_mismatched_queries_and_small_splits() {
    let data = generate(&Dgp::new(DgpKind::LocationScale, 1), 100).unwrap();
    let m = baseline_fit(&data, Split::contiguous(0.5), alpha(0.1), BaselineMethod::Cqr).unwrap();
    assert!(m.predict(&[0.1, 0.2]).is_err());
    let small = data.slice(0, 15).unwrap();
    assert!(baseline_fit(&small, Split::contiguous(0.5), alpha(0.1), BaselineMethod::CpLoc).is_err());
}
