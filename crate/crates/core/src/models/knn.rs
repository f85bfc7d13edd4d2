use std::cmp::Ordering;

use super::{FeatureMatrix, ModelError, Result};

/// Brute-force k-nearest-neighbor regressor over stored rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    store: FeatureMatrix,
    k: usize,
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn stored_rows(&self) -> usize {
        self.store.nrows()
    }
}

pub fn fit_knn(x: &FeatureMatrix, k: usize) -> Result<KnnModel> {
    x.require_targets()?;
    if k == 0 || k > x.nrows() {
        return Err(ModelError::KTooLarge { k, rows: x.nrows() });
    }
    Ok(KnnModel {
        store: x.clone(),
        k,
    })
}

/// Unweighted mean of the targets of the `k` nearest stored rows (Euclidean distance,
/// ties broken by lower stored-row index).
pub fn predict_knn(model: &KnnModel, row: &[f64]) -> Result<f64> {
    let order = nearest(&model.store, row, model.k)?;
    let targets = model.store.require_targets()?;
    Ok(order.iter().map(|&i| targets[i]).sum::<f64>() / model.k as f64)
}

/// Indices of the `k` stored rows nearest to `query`, nearest first.
pub(crate) fn nearest(store: &FeatureMatrix, query: &[f64], k: usize) -> Result<Vec<usize>> {
    if query.len() != store.ncols() {
        return Err(ModelError::DimensionMismatch {
            expected: store.ncols(),
            found: query.len(),
        });
    }
    if k == 0 || k > store.nrows() {
        return Err(ModelError::KTooLarge {
            k,
            rows: store.nrows(),
        });
    }
    let mut dist: Vec<(f64, usize)> = store
        .rows()
        .enumerate()
        .map(|(i, r)| (squared_distance(r, query), i))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    };
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, by_distance);
        dist.truncate(k);
    }
    dist.sort_unstable_by(by_distance);
    Ok(dist.into_iter().map(|(_, i)| i).collect())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
