//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::data::Design;
use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-11;

/// Fails with [`Error::SingularDesign`] unless the design has full column
/// rank. Columns are scaled to unit norm before the eigenvalue test.
pub fn check_full_rank(design: &Design) -> Result<()> {
    let p = design.ncols();
    if p == 0 || design.nrows() < p {
        return Err(Error::SingularDesign);
    }
    let gram = gram(design, None);
    let scale: Vec<f64> = (0..p).map(|j| gram[(j, j)].sqrt()).collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::SingularDesign);
    }
    let corr = DMatrix::from_fn(p, p, |i, j| gram[(i, j)] / (scale[i] * scale[j]));
    let eig = corr.symmetric_eigenvalues();
    let max = eig.iter().copied().fold(0.0_f64, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= RANK_TOL * max {
        return Err(Error::SingularDesign);
    }
    Ok(())
}

/// `X' W X` with optional observation weights.
pub fn gram(design: &Design, weights: Option<&[f64]>) -> DMatrix<f64> {
    let p = design.ncols();
    let mut g = DMatrix::zeros(p, p);
    for i in 0..design.nrows() {
        let row = design.row(i);
        let w = weights.map_or(1.0, |w| w[i]);
        for a in 0..p {
            let ra = w * row[a];
            for b in a..p {
                g[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            g[(a, b)] = g[(b, a)];
        }
    }
    g
}

/// `X' W v`.
pub fn cross(design: &Design, v: &[f64], weights: Option<&[f64]>) -> DVector<f64> {
    let p = design.ncols();
    let mut out = DVector::zeros(p);
    for i in 0..design.nrows() {
        let w = weights.map_or(1.0, |w| w[i]) * v[i];
        for (j, x) in design.row(i).iter().enumerate() {
            out[j] += w * x;
        }
    }
    out
}

/// Solves a symmetric positive definite system, falling back to LU.
pub fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    a.lu()
        .solve(b)
        .ok_or_else(|| Error::Numeric("singular normal equations".into()))
}

/// Weighted least squares `argmin sum w_i (y_i - x_i' b)^2`.
pub fn weighted_least_squares(
    design: &Design,
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let g = gram(design, weights);
    let rhs = cross(design, y, weights);
    Ok(solve_spd(g, &rhs)?.iter().copied().collect())
}
