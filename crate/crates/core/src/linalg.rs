//! Least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

/// Relative threshold on the diagonal of R below which a column is treated as dependent.
const RANK_TOL: f64 = 1e-10;

/// Solves `min ||A x - b||` for a full-column-rank `A`. Returns `None` when `A` has fewer
/// rows than columns or is numerically rank deficient.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Some(DVector::zeros(0));
    }
    if rows < cols {
        return None;
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let max_diag = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_diag == 0.0 || r.diagonal().iter().any(|v| v.abs() <= RANK_TOL * max_diag) {
        return None;
    }
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb)
}
