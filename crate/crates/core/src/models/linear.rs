use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, ModelError, Result};
use crate::linalg::lstsq;

/// Ridge strength applied on the standardized design when plain least squares is singular.
pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOptions {
    /// `None` disables the fallback and surfaces [`ModelError::SingularSystem`].
    pub ridge: Option<f64>,
}

impl Default for LinearOptions {
    fn default() -> Self {
        Self {
            ridge: Some(DEFAULT_RIDGE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

pub fn fit_linear(x: &FeatureMatrix) -> Result<LinearModel> {
    fit_linear_with(x, LinearOptions::default())
}

/// Ordinary least squares with an intercept.
///
/// The intercept is handled by centering, and the centered system is solved by QR. When
/// that system is rank deficient (collinear or constant columns, or too few rows) and a
/// ridge strength is configured, the columns are standardized and a ridge-penalized QR
/// solve is used instead; constant columns then get weight zero.
pub fn fit_linear_with(x: &FeatureMatrix, options: LinearOptions) -> Result<LinearModel> {
    let y = x.require_targets()?;
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(ModelError::EmptyMatrix);
    }
    let nf = n as f64;
    let x_mean: Vec<f64> = (0..p).map(|j| x.column(j).sum::<f64>() / nf).collect();
    let y_mean = y.iter().sum::<f64>() / nf;

    let centered = DMatrix::from_fn(n, p, |i, j| x.row(i)[j] - x_mean[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    let weights = match (n > p).then(|| lstsq(&centered, &yc)).flatten() {
        Some(w) => w.iter().copied().collect(),
        None => match options.ridge {
            Some(lambda) if lambda > 0.0 => ridge_solve(&centered, &yc, lambda),
            _ => return Err(ModelError::SingularSystem),
        },
    };
    let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel { weights, intercept })
}

fn ridge_solve(centered: &DMatrix<f64>, yc: &DVector<f64>, lambda: f64) -> Vec<f64> {
    let (n, p) = centered.shape();
    let sds: Vec<f64> = (0..p)
        .map(|j| (centered.column(j).norm_squared() / n as f64).sqrt())
        .collect();
    let active: Vec<usize> = (0..p).filter(|&j| sds[j] > 0.0).collect();
    let mut weights = vec![0.0; p];
    if active.is_empty() {
        return weights;
    }
    let a = active.len();
    let root = lambda.sqrt();
    let design = DMatrix::from_fn(n + a, a, |i, k| {
        if i < n {
            centered[(i, active[k])] / sds[active[k]]
        } else if i - n == k {
            root
        } else {
            0.0
        }
    });
    let rhs = DVector::from_fn(n + a, |i, _| if i < n { yc[i] } else { 0.0 });
    if let Some(z) = lstsq(&design, &rhs) {
        for (k, &j) in active.iter().enumerate() {
            weights[j] = z[k] / sds[j];
        }
    }
    weights
}

pub fn predict_linear(model: &LinearModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.weights.len() {
        return Err(ModelError::DimensionMismatch {
            expected: model.weights.len(),
            found: row.len(),
        });
    }
    Ok(model.intercept + model.weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>())
}

/// Least-squares parabola `y = a x^2 + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `(x*, y*)` with `x* = -b / 2a`; `None` when the fit is a straight line.
    pub vertex: Option<(f64, f64)>,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }
}

pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(ModelError::DegenerateInput {
            distinct: xs.len(),
        });
    }
    // Fit in t = (x - shift) / scale for conditioning, then expand back.
    let n = points.len();
    let shift = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let scale = points
        .iter()
        .map(|p| (p.0 - shift).abs())
        .fold(0.0, f64::max);
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let t = (points[i].0 - shift) / scale;
        match j {
            0 => t * t,
            1 => t,
            _ => 1.0,
        }
    });
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let coef = lstsq(&design, &rhs).ok_or(ModelError::DegenerateInput {
        distinct: xs.len(),
    })?;
    let (qa, qb, qc) = (coef[0], coef[1], coef[2]);
    let a = qa / (scale * scale);
    let b = qb / scale - 2.0 * qa * shift / (scale * scale);
    let c = qa * shift * shift / (scale * scale) - qb * shift / scale + qc;
    let vertex = (qa.abs() > 1e-12 * (qb.abs() + qc.abs()).max(f64::MIN_POSITIVE)).then(|| {
        let x = -b / (2.0 * a);
        (x, (a * x + b) * x + c)
    });
    Ok(QuadraticFit { a, b, c, vertex })
}
