//! Statistical models behind the predictive strategies.

mod cv;
mod knn;
mod linear;
mod scaler;
mod score;
mod split;

pub use cv::{grid_search_k, CvGridResult, DEFAULT_K_CANDIDATES};
pub use knn::{fit_knn, predict_knn, KnnModel};
pub use linear::{
    fit_linear, fit_linear_with, fit_quadratic, predict_linear, LinearModel, LinearOptions,
    QuadraticFit, DEFAULT_RIDGE,
};
pub use scaler::{apply_scaler, fit_scaler, ScalerKind, ScalerParams};
pub use score::r2_score;
pub use split::{split_indices, train_test_split, SplitIndices};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("feature matrix has no rows")]
    EmptyMatrix,
    #[error("row {row} has {found} features, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{targets} targets for {rows} rows")]
    TargetLengthMismatch { rows: usize, targets: usize },
    #[error("operation requires targets")]
    MissingTargets,
    #[error("dimension mismatch: expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("test fraction must be in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("design matrix is rank deficient")]
    SingularSystem,
    #[error("quadratic fit needs at least 3 distinct x values, got {distinct}")]
    DegenerateInput { distinct: usize },
    #[error("k = {k} is invalid for {rows} stored rows")]
    KTooLarge { k: usize, rows: usize },
    #[error("length mismatch: {predicted} predictions for {actual} actual values")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("actual values are constant; R^2 undefined")]
    ZeroVariance,
    #[error("candidate k = {k} is invalid (smallest training fold has {max} rows)")]
    InvalidCandidate { k: usize, max: usize },
    #[error("{rows} rows cannot be split into {folds} folds")]
    TooFewRowsForFolds { rows: usize, folds: usize },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Dense row-major feature rows with optional aligned regression targets.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    ncols: usize,
    targets: Option<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>, targets: Option<Vec<f64>>) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(ModelError::RaggedRows {
                    row: i,
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, ncols, targets)
    }

    pub fn from_flat(data: Vec<f64>, ncols: usize, targets: Option<Vec<f64>>) -> Result<Self> {
        let nrows = data.len().checked_div(ncols).unwrap_or(0);
        if ncols != 0 && !data.len().is_multiple_of(ncols) {
            return Err(ModelError::RaggedRows {
                row: nrows,
                expected: ncols,
                found: data.len() % ncols,
            });
        }
        if let Some(t) = &targets {
            if t.len() != nrows {
                return Err(ModelError::TargetLengthMismatch {
                    rows: nrows,
                    targets: t.len(),
                });
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite);
            }
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        Ok(Self {
            data,
            ncols,
            targets,
        })
    }

    pub fn nrows(&self) -> usize {
        self.data.len().checked_div(self.ncols).unwrap_or(0)
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_empty(&self) -> bool {
        self.nrows() == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.ncols.max(1))
    }

    pub fn targets(&self) -> Option<&[f64]> {
        self.targets.as_deref()
    }

    pub fn with_targets(self, targets: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.data, self.ncols, Some(targets))
    }

    fn require_targets(&self) -> Result<&[f64]> {
        self.targets.as_deref().ok_or(ModelError::MissingTargets)
    }

    /// Rows (and targets, when present) at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.ncols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            data,
            ncols: self.ncols,
            targets: self
                .targets
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
        }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }
}
