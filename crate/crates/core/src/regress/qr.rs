//! Linear quantile regression and the quantile-regression process.
//!
//! `min_b sum_t rho_tau(y_t - x_t' b)` is a linear program whose optimum is
//! attained at an interpolating fit: a basis `h` of `p` observations with
//! `x_h b = y_h`. The solver starts from an IRLS approximation (smoothing
//! parameter driven down to 1e-8), picks the `p` closest observations as the
//! initial basis and then exchanges basis rows along descent edges with an
//! exact line search over the piecewise-linear objective until no edge
//! descends. The result is certified by the subgradient condition along the
//! coordinate directions.
//!
//! Rows are put in canonical order (by `y`, then `x`) before solving. When the
//! optimum is not unique the solver walks along flat edges towards the
//! lexicographically smallest interpolation set, which makes the fit a
//! deterministic function of the multiset of rows.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use crate::data::{dot, features, Dataset, Design};
use crate::error::{invalid, Error, Result};
use crate::grid::TauGrid;
use crate::regress::linalg::{check_full_rank, weighted_least_squares};
use crate::regress::rearrange;

/// Check (pinball) loss `u (tau - 1{u < 0})`.
pub fn pinball(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        u * (tau - 1.0)
    } else {
        u * tau
    }
}

pub fn pinball_objective(design: &Design, y: &[f64], beta: &[f64], tau: f64) -> f64 {
    (0..design.nrows())
        .map(|i| pinball(y[i] - dot(design.row(i), beta), tau))
        .sum()
}

/// Solution of a single quantile regression. `basis` indexes the canonical
/// (sorted) row order.
#[derive(Debug, Clone, PartialEq)]
pub struct QrSolution {
    pub beta: Vec<f64>,
    pub objective: f64,
    pub basis: Vec<usize>,
}

/// Fits one quantile regression of `y` on the columns of `x`.
pub fn fit_qr(x: &Design, y: &[f64], tau: f64) -> Result<QrSolution> {
    if !(tau > 0.0 && tau < 1.0) {
        return invalid(format!("tau must lie in (0, 1), got {tau}"));
    }
    let (x, y) = canonical(x, y)?;
    check_full_rank(&x)?;
    let solver = Simplex::new(&x, &y);
    let start = solver.irls_start(tau)?;
    let (beta, basis) = solver.solve(tau, start)?;
    certify(&x, &y, &beta, tau)?;
    let objective = pinball_objective(&x, &y, &beta, tau);
    Ok(QrSolution {
        beta,
        objective,
        basis,
    })
}

/// Quantile-regression process on a grid of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFit {
    pub tau_grid: TauGrid,
    /// One coefficient vector per level, in grid order.
    pub betas: Vec<Vec<f64>>,
    pub objective_values: Vec<f64>,
    pub intercept: bool,
    n_features: usize,
}

impl QrFit {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Fitted quantile curve `tau -> f' b(tau)` at `x`, after rearrangement.
    pub fn curve(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features {
            return invalid(format!(
                "query has {} predictors, model expects {}",
                x.len(),
                self.n_features
            ));
        }
        let f = features(x, self.intercept);
        Ok(rearrange(self.betas.iter().map(|b| dot(&f, b)).collect()))
    }
}

/// Fits every level of `grid`, warm-starting each level from the previous
/// optimal basis.
pub fn fit_qr_process(data: &Dataset, grid: &TauGrid, intercept: bool) -> Result<QrFit> {
    if grid.is_empty() {
        return invalid("tau grid must not be empty");
    }
    let (x, y) = data.canonical_design(intercept);
    check_full_rank(&x)?;
    let solver = Simplex::new(&x, &y);
    let mut betas = Vec::with_capacity(grid.len());
    let mut objective_values = Vec::with_capacity(grid.len());
    let mut basis: Option<Vec<usize>> = None;
    for &tau in grid.taus() {
        let start = match basis.take() {
            Some(b) => b,
            None => solver.irls_start(tau)?,
        };
        let (beta, b) = solver.solve(tau, start)?;
        certify(&x, &y, &beta, tau)?;
        objective_values.push(pinball_objective(&x, &y, &beta, tau));
        betas.push(beta);
        basis = Some(b);
    }
    Ok(QrFit {
        tau_grid: grid.clone(),
        betas,
        objective_values,
        intercept,
        n_features: data.n_features(),
    })
}

/// `F(y, x) = c + step * #{tau : x' b(tau) <= y}`, clamped to [0, 1].
pub fn qr_cdf(fit: &QrFit, x: &[f64], y: f64) -> Result<f64> {
    let curve = fit.curve(x)?;
    Ok(QrConditional::new(curve, &fit.tau_grid).cdf(y))
}

/// Conditional distribution implied by a rearranged quantile curve.
#[derive(Debug, Clone)]
pub struct QrConditional {
    sorted: Vec<f64>,
    trim: f64,
    step: f64,
}

impl QrConditional {
    pub fn new(sorted: Vec<f64>, grid: &TauGrid) -> Self {
        QrConditional {
            sorted,
            trim: grid.trim(),
            step: grid.step(),
        }
    }

    pub fn curve(&self) -> &[f64] {
        &self.sorted
    }

    fn count_le(&self, y: f64) -> usize {
        self.sorted.partition_point(|q| *q <= y)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        (self.trim + self.count_le(y) as f64 * self.step).clamp(0.0, 1.0)
    }

    /// `inf {y : F(y) >= tau}`, clamped to the fitted curve.
    pub fn quantile(&self, tau: f64) -> f64 {
        let m = ((tau - self.trim) / self.step - COUNT_EPS).ceil();
        let idx = (m - 1.0).clamp(0.0, (self.sorted.len() - 1) as f64) as usize;
        self.sorted[idx]
    }

    /// `sup {y : F(y) <= u}`, clamped to the fitted curve.
    pub fn upper_quantile(&self, u: f64) -> f64 {
        let m = ((u - self.trim) / self.step + COUNT_EPS).floor();
        let idx = m.clamp(0.0, (self.sorted.len() - 1) as f64) as usize;
        self.sorted[idx]
    }
}

/// Slack when converting CDF levels back into counts of the Riemann sum.
const COUNT_EPS: f64 = 1e-9;

fn canonical(x: &Design, y: &[f64]) -> Result<(Design, Vec<f64>)> {
    if x.nrows() != y.len() {
        return invalid(format!(
            "design has {} rows but outcome has {}",
            x.nrows(),
            y.len()
        ));
    }
    if y.iter().chain(x.as_slice()).any(|v| !v.is_finite()) {
        return invalid("quantile regression input contains non-finite values");
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| {
        y[a].total_cmp(&y[b]).then_with(|| {
            x.row(a)
                .iter()
                .zip(x.row(b))
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| x.row(i).to_vec()).collect();
    let sorted_y = order.iter().map(|&i| y[i]).collect();
    Ok((Design::from_rows(&rows)?, sorted_y))
}

/// Directional-derivative certificate along `+-e_j`.
fn certify(x: &Design, y: &[f64], beta: &[f64], tau: f64) -> Result<()> {
    let p = x.ncols();
    for j in 0..p {
        for sign in [1.0, -1.0] {
            let mut deriv = 0.0;
            let mut mag = 1.0;
            for i in 0..x.nrows() {
                let row = x.row(i);
                let fit = dot(row, beta);
                let r = y[i] - fit;
                let d = sign * row[j];
                mag += d.abs();
                if is_zero_residual(r, y[i], fit) {
                    deriv += pinball(-d, tau);
                } else {
                    deriv -= psi(r, tau) * d;
                }
            }
            if deriv < -1e-9 * mag {
                return Err(Error::Numeric(format!(
                    "quantile regression failed its optimality check at tau = {tau}"
                )));
            }
        }
    }
    Ok(())
}

fn psi(r: f64, tau: f64) -> f64 {
    if r < 0.0 {
        tau - 1.0
    } else {
        tau
    }
}

fn is_zero_residual(r: f64, y: f64, fit: f64) -> bool {
    r.abs() <= 1e-12 * (1.0 + y.abs() + fit.abs())
}

struct Simplex<'a> {
    x: &'a Design,
    y: &'a [f64],
    n: usize,
    p: usize,
}

/// Edge of the current vertex: move coordinate `k` of the basis in direction
/// `sign`.
#[derive(Clone, Copy)]
struct Edge {
    k: usize,
    sign: f64,
    slope: f64,
}

impl<'a> Simplex<'a> {
    fn new(x: &'a Design, y: &'a [f64]) -> Self {
        Simplex {
            x,
            y,
            n: x.nrows(),
            p: x.ncols(),
        }
    }

    /// Approximate minimiser by IRLS, then the `p` rows with the smallest
    /// absolute residuals that span the column space.
    fn irls_start(&self, tau: f64) -> Result<Vec<usize>> {
        let mut beta = weighted_least_squares(self.x, self.y, None)?;
        let resid = |b: &[f64]| -> Vec<f64> {
            (0..self.n)
                .map(|i| self.y[i] - dot(self.x.row(i), b))
                .collect()
        };
        let mut r = resid(&beta);
        let mut eps = (r.iter().map(|v| v.abs()).sum::<f64>() / self.n as f64).max(1e-8);
        let mut w = vec![0.0; self.n];
        for _ in 0..40 {
            for i in 0..self.n {
                let side = if r[i] >= 0.0 { tau } else { 1.0 - tau };
                w[i] = side / r[i].abs().max(eps);
            }
            match weighted_least_squares(self.x, self.y, Some(&w)) {
                Ok(b) if b.iter().all(|v| v.is_finite()) => beta = b,
                _ => break,
            }
            r = resid(&beta);
            if eps <= 1e-8 {
                break;
            }
            eps = (eps * 0.5).max(1e-8);
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()).then(a.cmp(&b)));
        self.spanning_basis(&order)
    }

    /// Greedily picks `p` linearly independent rows in the given order.
    fn spanning_basis(&self, order: &[usize]) -> Result<Vec<usize>> {
        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(self.p);
        let mut basis = Vec::with_capacity(self.p);
        for &i in order {
            let row = self.x.row(i);
            let norm = dot(row, row).sqrt();
            if norm == 0.0 {
                continue;
            }
            let mut v = row.to_vec();
            for q in &ortho {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
            let rest = dot(&v, &v).sqrt();
            if rest > 1e-8 * norm {
                v.iter_mut().for_each(|a| *a /= rest);
                ortho.push(v);
                basis.push(i);
                if basis.len() == self.p {
                    return Ok(basis);
                }
            }
        }
        Err(Error::SingularDesign)
    }

    fn solve(&self, tau: f64, mut basis: Vec<usize>) -> Result<(Vec<f64>, Vec<usize>)> {
        let (n, p) = (self.n, self.p);
        let max_iter = 50 * n + 1000;
        let mut visited: HashSet<Vec<usize>> = HashSet::new();
        let mut in_basis = vec![false; n];
        let mut r = vec![0.0; n];
        let mut zero = vec![false; n];
        let mut c = vec![0.0; n * p];

        for _ in 0..max_iter {
            // Sorted so that beta depends on the basis set only.
            basis.sort_unstable();
            let bmat = DMatrix::from_fn(p, p, |k, j| self.x.row(basis[k])[j]);
            let binv = bmat
                .try_inverse()
                .ok_or_else(|| Error::Numeric("quantile regression basis became singular".into()))?;
            let yh = DVector::from_iterator(p, basis.iter().map(|&i| self.y[i]));
            let beta: Vec<f64> = (&binv * yh).iter().copied().collect();

            in_basis.iter_mut().for_each(|v| *v = false);
            basis.iter().for_each(|&i| in_basis[i] = true);
            let mut g = vec![0.0; p];
            let mut zeros_off_basis = false;
            for i in 0..n {
                let row = self.x.row(i);
                let fit = dot(row, &beta);
                r[i] = if in_basis[i] { 0.0 } else { self.y[i] - fit };
                zero[i] = in_basis[i] || is_zero_residual(r[i], self.y[i], fit);
                if zero[i] {
                    zeros_off_basis |= !in_basis[i];
                } else {
                    let s = psi(r[i], tau);
                    g.iter_mut().zip(row).for_each(|(gj, xj)| *gj += s * xj);
                }
                // c_i = x_i' B^{-1}: coordinates of row i in the basis.
                for k in 0..p {
                    c[i * p + k] = (0..p).map(|j| row[j] * binv[(j, k)]).sum();
                }
            }

            let mut edges = Vec::with_capacity(2 * p);
            let mut violated = Vec::new();
            for k in 0..p {
                let a_k: f64 = (0..p).map(|j| g[j] * binv[(j, k)]).sum();
                let mut mag = 1.0;
                let (mut extra_up, mut extra_down) = (0.0, 0.0);
                for i in 0..n {
                    let cik = c[i * p + k];
                    if !in_basis[i] {
                        mag += cik.abs();
                    }
                    if zero[i] && !in_basis[i] {
                        extra_up += pinball(-cik, tau);
                        extra_down += pinball(cik, tau);
                    }
                }
                let tol = 1e-12 * mag;
                let up = -a_k + (1.0 - tau);
                let down = a_k + tau;
                edges.push((Edge { k, sign: 1.0, slope: up + extra_up }, tol));
                edges.push((Edge { k, sign: -1.0, slope: down + extra_down }, tol));
                if up < -tol {
                    violated.push((k, 1.0));
                }
                if down < -tol {
                    violated.push((k, -1.0));
                }
            }

            // Steepest descending edge.
            let descent = edges
                .iter()
                .filter(|(e, tol)| e.slope < -tol)
                .min_by(|a, b| a.0.slope.total_cmp(&b.0.slope));
            if let Some(&(edge, tol)) = descent {
                let entering = self
                    .line_search(&r, &zero, &c, edge, tol)
                    .ok_or_else(|| Error::Numeric("quantile regression is unbounded".into()))?;
                basis[edge.k] = entering;
                visited.clear();
                continue;
            }

            // Degenerate vertex: the basis certificate fails only because of
            // extra zero residuals. Exchange with one of them without moving.
            if zeros_off_basis && !violated.is_empty() {
                visited.insert(sorted(&basis));
                let mut moved = false;
                'outer: for &(k, _) in &violated {
                    for i in 0..n {
                        if zero[i] && !in_basis[i] && c[i * p + k].abs() > 1e-12 {
                            let mut cand = basis.clone();
                            cand[k] = i;
                            if !visited.contains(&sorted(&cand)) {
                                basis = cand;
                                moved = true;
                                break 'outer;
                            }
                        }
                    }
                }
                if moved {
                    continue;
                }
            }

            // Optimal. Follow flat edges to a lexicographically smaller basis.
            let current = sorted(&basis);
            visited.insert(current.clone());
            let mut best: Option<Vec<usize>> = None;
            for &(edge, tol) in &edges {
                if edge.slope.abs() > tol {
                    continue;
                }
                if let Some(i) = self.first_breakpoint(&r, &zero, &c, edge) {
                    let mut cand = basis.clone();
                    cand[edge.k] = i;
                    let key = sorted(&cand);
                    if key < current
                        && !visited.contains(&key)
                        && best.as_ref().is_none_or(|b| key < sorted(b))
                    {
                        best = Some(cand);
                    }
                }
            }
            match best {
                Some(b) => basis = b,
                None => return Ok((beta, basis)),
            }
        }
        Err(Error::Numeric(format!(
            "quantile regression did not converge at tau = {tau}"
        )))
    }

    /// Breakpoints `s_i = r_i / d_i > 0` along the edge, in increasing order.
    fn breakpoints(&self, r: &[f64], zero: &[bool], c: &[f64], edge: Edge) -> Vec<(f64, usize, f64)> {
        let p = self.p;
        let mut pts: Vec<(f64, usize, f64)> = (0..self.n)
            .filter(|&i| !zero[i])
            .filter_map(|i| {
                let d = edge.sign * c[i * p + edge.k];
                if d == 0.0 {
                    return None;
                }
                let s = r[i] / d;
                (s > 0.0).then_some((s, i, d.abs()))
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pts
    }

    /// Exact minimisation of the convex piecewise-linear objective along the
    /// edge; returns the row that becomes interpolated.
    fn line_search(&self, r: &[f64], zero: &[bool], c: &[f64], edge: Edge, tol: f64) -> Option<usize> {
        let mut slope = edge.slope;
        for (_, i, w) in self.breakpoints(r, zero, c, edge) {
            slope += w;
            if slope >= -tol {
                return Some(i);
            }
        }
        None
    }

    fn first_breakpoint(&self, r: &[f64], zero: &[bool], c: &[f64], edge: Edge) -> Option<usize> {
        self.breakpoints(r, zero, c, edge).first().map(|b| b.1)
    }
}

fn sorted(basis: &[usize]) -> Vec<usize> {
    let mut b = basis.to_vec();
    b.sort_unstable();
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn intercept_design(n: usize) -> Design {
        Design::from_rows(&vec![vec![1.0]; n]).unwrap()
    }

    /// Minimum over all interpolating fits through `p` rows.
    fn enumeration_oracle(x: &Design, y: &[f64], tau: f64) -> f64 {
        let (n, p) = (x.nrows(), x.ncols());
        let mut best = f64::INFINITY;
        let mut idx: Vec<usize> = (0..p).collect();
        loop {
            let m = DMatrix::from_fn(p, p, |k, j| x.row(idx[k])[j]);
            if let Some(inv) = m.try_inverse() {
                let b: Vec<f64> =
                    (&inv * DVector::from_iterator(p, idx.iter().map(|&i| y[i]))).iter().copied().collect();
                best = best.min(pinball_objective(x, y, &b, tau));
            }
            // next combination
            let mut k = p;
            loop {
                if k == 0 {
                    return best;
                }
                k -= 1;
                if idx[k] < n - p + k {
                    idx[k] += 1;
                    for j in k + 1..p {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn intercept_only_examples() {
        let x = intercept_design(3);
        let y = [1.0, 2.0, 9.0];
        let med = fit_qr(&x, &y, 0.5).unwrap();
        assert_eq!(med.beta, vec![2.0]);
        let hi = fit_qr(&x, &y, 0.9).unwrap();
        assert_eq!(hi.beta, vec![9.0]);
        assert!((hi.objective - 1.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_fit_recovers_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| vec![1.0, rng.gen_range(-2.0..2.0), rng.gen_range(0.0..1.0)])
            .collect();
        let coef = [0.5, -1.25, 3.0];
        let y: Vec<f64> = rows.iter().map(|r| dot(r, &coef)).collect();
        let x = Design::from_rows(&rows).unwrap();
        for tau in [0.1, 0.5, 0.93] {
            let s = fit_qr(&x, &y, tau).unwrap();
            for (b, c) in s.beta.iter().zip(coef) {
                assert!((b - c).abs() < 1e-9);
            }
            assert!(s.objective.abs() < 1e-9);
        }
    }

    #[test]
    fn matches_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let p = rng.gen_range(1..=3);
            let n = rng.gen_range(p + 1..=20);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let mut r = vec![1.0];
                    r.extend((1..p).map(|_| rng.gen_range(-1.0..1.0)));
                    r
                })
                .collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let x = Design::from_rows(&rows).unwrap();
            let tau = rng.gen_range(0.05..0.95);
            let s = fit_qr(&x, &y, tau).unwrap();
            let oracle = enumeration_oracle(&x, &y, tau);
            assert!(s.objective <= oracle + 1e-8, "{} vs {}", s.objective, oracle);
        }
    }

    #[test]
    fn ties_resolve_to_smallest_interpolation_set() {
        let d = Dataset::outcomes_only(vec![4.0, 2.0, 3.0, 1.0]).unwrap();
        let grid = TauGrid::from_levels(vec![0.25, 0.5, 0.75]).unwrap();
        let fit = fit_qr_process(&d, &grid, true).unwrap();
        let b: Vec<f64> = fit.betas.iter().map(|b| b[0]).collect();
        assert_eq!(b, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn duplicated_outcomes_are_handled() {
        let x = intercept_design(4);
        let y = [1.0, 2.0, 2.0, 3.0];
        for (tau, want) in [(0.7, 2.0), (0.3, 2.0), (0.5, 2.0), (0.8, 3.0)] {
            assert_eq!(fit_qr(&x, &y, tau).unwrap().beta, vec![want], "tau {tau}");
        }
    }

    #[test]
    fn single_level_process_equals_fit_qr() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen_range(0.0..1.0)]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] + rng.gen_range(-1.0..1.0)).collect();
        let d = Dataset::new(y, rows).unwrap();
        let grid = TauGrid::from_levels(vec![0.3]).unwrap();
        let process = fit_qr_process(&d, &grid, true).unwrap();
        let (x, y) = d.canonical_design(true);
        let single = fit_qr(&x, &y, 0.3).unwrap();
        assert_eq!(process.betas[0], single.beta);
    }

    #[test]
    fn rejects_bad_input() {
        let x = intercept_design(2);
        assert!(fit_qr(&x, &[1.0, f64::NAN], 0.5).is_err());
        assert!(fit_qr(&x, &[1.0, 2.0], 1.0).is_err());
        let x = Design::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(fit_qr(&x, &[1.0, 2.0, 3.0], 0.5), Err(Error::SingularDesign));
        let d = Dataset::outcomes_only(vec![1.0, 2.0]).unwrap();
        assert!(TauGrid::from_levels(vec![]).is_err());
        assert!(fit_qr_process(&d, &TauGrid::default(), true).is_ok());
    }

    #[test]
    fn implied_cdf_of_intercept_model() {
        let d = Dataset::outcomes_only(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let fit = fit_qr_process(&d, &TauGrid::default(), true).unwrap();
        let step = fit.tau_grid.step();
        assert!((qr_cdf(&fit, &[], 2.5).unwrap() - 0.5).abs() <= step + 1e-12);
        assert!((qr_cdf(&fit, &[], 0.0).unwrap() - 0.001).abs() < 1e-12);
        assert!((qr_cdf(&fit, &[], 10.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(qr_cdf(&fit, &[1.0], 2.0).is_err());
    }
}
