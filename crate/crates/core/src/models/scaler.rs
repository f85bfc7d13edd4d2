use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalerKind {
    /// Zero mean, unit population standard deviation.
    Standardize,
    /// Maps each column onto `[0, 1]`.
    MinMax,
}

/// Per-column statistics: `(center, spread)` is `(mean, sd)` or `(min, max - min)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub kind: ScalerKind,
    pub centers: Vec<f64>,
    pub spreads: Vec<f64>,
}

pub fn fit_scaler(kind: ScalerKind, x: &FeatureMatrix) -> Result<ScalerParams> {
    if x.is_empty() {
        return Err(ModelError::EmptyMatrix);
    }
    let n = x.nrows() as f64;
    let mut centers = Vec::with_capacity(x.ncols());
    let mut spreads = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        match kind {
            ScalerKind::Standardize => {
                let first = x.row(0)[j];
                if x.column(j).all(|v| v == first) {
                    centers.push(first);
                    spreads.push(0.0);
                    continue;
                }
                let mean = x.column(j).sum::<f64>() / n;
                let var = x.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                centers.push(mean);
                spreads.push(var.sqrt());
            }
            ScalerKind::MinMax => {
                let (lo, hi) = x
                    .column(j)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                centers.push(lo);
                spreads.push(hi - lo);
            }
        }
    }
    Ok(ScalerParams {
        kind,
        centers,
        spreads,
    })
}

impl ScalerParams {
    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.centers.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.centers.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.centers.iter().zip(&self.spreads))
            .map(|(&v, (&c, &s))| if s == 0.0 { 0.0 } else { (v - c) / s })
            .collect())
    }
}

/// Scales every row of `x`; targets are carried over unchanged.
pub fn apply_scaler(params: &ScalerParams, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    let mut data = Vec::with_capacity(x.nrows() * x.ncols());
    for row in x.rows() {
        data.extend(params.apply_row(row)?);
    }
    FeatureMatrix::from_flat(data, x.ncols(), x.targets().map(<[f64]>::to_vec))
}
