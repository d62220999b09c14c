use dcp::sim::{
    generate, mean_oracle_half_width, oracle_dcp_interval, realized_volatility,
    skewed_oracle_lengths, Dgp, DgpKind, RV_WINDOW,
};
use dcp::Alpha;

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

const N: usize = 200_000;
// Three binomial standard errors at 0.9.
const TOL: f64 = 3.0 * 0.3 / 447.2;

#[test]
fn location_scale_oracles_cover() {
    let d = generate(&Dgp::new(DgpKind::LocationScale, 100), N).unwrap();
    let q = mean_oracle_half_width(alpha(0.1));
    let mut mean_hits = 0;
    let mut dcp_hits = 0;
    let mut high_x = (0, 0);
    for (x, &y) in d.rows().zip(d.y()) {
        let x = x[0];
        mean_hits += usize::from((y - x).abs() <= q);
        let ok = oracle_dcp_interval(x, alpha(0.1)).unwrap().contains(y);
        dcp_hits += usize::from(ok);
        if x > 0.8 {
            high_x.0 += usize::from(ok);
            high_x.1 += 1;
        }
    }
    assert!((mean_hits as f64 / N as f64 - 0.9).abs() < TOL);
    assert!((dcp_hits as f64 / N as f64 - 0.9).abs() < TOL);
    // Conditional exactness: also 0.9 among large x.
    let c = high_x.0 as f64 / high_x.1 as f64;
    assert!((c - 0.9).abs() < 3.0 * 0.3 / (high_x.1 as f64).sqrt());
}

#[test]
fn skewed_oracle_intervals_cover() {
    let d = generate(&Dgp::new(DgpKind::SkewedExponential, 101), N).unwrap();
    let (equal_tailed, shortest) = skewed_oracle_lengths(alpha(0.1));
    let q05 = -(0.95f64).ln();
    let mut hits = (0, 0);
    for (x, &y) in d.rows().zip(d.y()) {
        let x = x[0];
        hits.0 += usize::from(y >= x * q05 && y <= x * (q05 + equal_tailed));
        hits.1 += usize::from(y <= x * shortest);
    }
    assert!((hits.0 as f64 / N as f64 - 0.9).abs() < TOL);
    assert!((hits.1 as f64 / N as f64 - 0.9).abs() < TOL);
}

#[test]
fn garch_predictor_is_lagged_realized_volatility() {
    let d = generate(&Dgp::new(DgpKind::ArGarchLike, 102), 40_000).unwrap();
    let r = d.y();
    let x = d.column(0);
    for t in RV_WINDOW..200 {
        let ss: f64 = r[t - RV_WINDOW..t].iter().map(|v| v * v).sum();
        assert!((x[t] - ss.sqrt()).abs() < 1e-12 * (1.0 + ss.sqrt()));
    }
    let rv = realized_volatility(r, RV_WINDOW).unwrap();
    assert!(rv[RV_WINDOW..].iter().zip(&x[RV_WINDOW..]).all(|(a, b)| a.unwrap() == *b));

    // Unconditional variance omega / (1 - a - b) = 1.
    let var = r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64;
    assert!((var - 1.0).abs() < 0.15, "{var}");
    // Returns are uncorrelated while their squares are not.
    let lag1 = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        let c0: f64 = s.iter().map(|v| (v - m).powi(2)).sum();
        s.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / c0
    };
    let sq: Vec<f64> = r.iter().map(|v| v * v).collect();
    assert!(lag1(r).abs() < 0.03);
    assert!(lag1(&sq) > 0.05);
}
