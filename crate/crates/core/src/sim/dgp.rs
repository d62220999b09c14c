use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::normal;
use crate::sim::volatility::{realized_volatility, RV_WINDOW};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DgpKind {
    LocationScale,
    SkewedExponential,
    ArGarchLike,
}

/// `s2_t = omega + a r_{t-1}^2 + b s2_{t-1}`, `r_t = s_t e_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub burn_in: usize,
}

impl Default for GarchParams {
    fn default() -> Self {
        GarchParams {
            omega: 0.05,
            a: 0.1,
            b: 0.85,
            burn_in: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dgp {
    pub kind: DgpKind,
    pub seed: u64,
    /// Independent stream of the same seed, for parallel generation.
    pub stream: u64,
    pub garch: GarchParams,
}

impl Dgp {
    pub fn new(kind: DgpKind, seed: u64) -> Self {
        Dgp {
            kind,
            seed,
            stream: 0,
            garch: GarchParams::default(),
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Uniform on [0, 1) with 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on the open interval (0, 1).
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    normal::quantile(open_unit(rng))
}

/// Draws `t` observations. Every process needs `t >= 2`.
pub fn generate(dgp: &Dgp, t: usize) -> Result<Dataset> {
    if t < 2 {
        return invalid(format!("need at least 2 observations, got {t}"));
    }
    let mut rng = dgp.rng();
    match dgp.kind {
        DgpKind::LocationScale => {
            let (mut y, mut x) = (Vec::with_capacity(t), Vec::with_capacity(t));
            for _ in 0..t {
                let xi = unit(&mut rng);
                let e = std_normal(&mut rng);
                x.push(xi);
                y.push(xi + xi * e);
            }
            Dataset::from_flat(y, x, 1)
        }
        DgpKind::SkewedExponential => {
            let (mut y, mut x) = (Vec::with_capacity(t), Vec::with_capacity(t));
            for _ in 0..t {
                let xi = 0.5 + unit(&mut rng);
                let e = -(1.0 - unit(&mut rng)).ln();
                x.push(xi);
                y.push(xi * e);
            }
            Dataset::from_flat(y, x, 1)
        }
        DgpKind::ArGarchLike => {
            let g = dgp.garch;
            if !(g.omega > 0.0 && g.a >= 0.0 && g.b >= 0.0 && g.a + g.b < 1.0) {
                return invalid("GARCH parameters must give a stationary variance");
            }
            let mut s2 = g.omega / (1.0 - g.a - g.b);
            let mut r_prev = 0.0;
            let total = g.burn_in + RV_WINDOW + t;
            let mut returns = Vec::with_capacity(total);
            for _ in 0..total {
                s2 = g.omega + g.a * r_prev * r_prev + g.b * s2;
                r_prev = s2.sqrt() * std_normal(&mut rng);
                returns.push(r_prev);
            }
            let kept = &returns[g.burn_in..];
            let rv = realized_volatility(kept, RV_WINDOW)?;
            let y = kept[RV_WINDOW..].to_vec();
            let x = rv[RV_WINDOW..].iter().map(|v| v.unwrap_or(0.0)).collect();
            Ok(Dataset::from_flat(y, x, 1)?.with_time_order(true))
        }
    }
}
