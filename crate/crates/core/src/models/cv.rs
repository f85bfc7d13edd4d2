use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::knn::nearest;
use super::{r2_score, FeatureMatrix, ModelError, Result};

/// Neighbor counts searched by the k-NN strategy.
pub const DEFAULT_K_CANDIDATES: [usize; 14] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15];

#[derive(Debug, Clone, PartialEq)]
pub struct CvGridResult {
    /// Mean held-out R² per candidate, ascending by k. `None` when no fold had a
    /// defined score (every held-out fold was constant).
    pub scores: Vec<(usize, Option<f64>)>,
    pub chosen_k: usize,
}

/// Picks the neighbor count with the best mean R² over a seeded k-fold partition.
///
/// Rows are shuffled with `seed` and cut into `folds` contiguous blocks, the first
/// `rows % folds` blocks holding one extra row. Ties go to the smallest k.
pub fn grid_search_k(
    x: &FeatureMatrix,
    candidates: &[usize],
    folds: usize,
    seed: u64,
) -> Result<CvGridResult> {
    let targets = x.require_targets()?;
    let n = x.nrows();
    if folds < 2 || n < folds {
        return Err(ModelError::TooFewRowsForFolds { rows: n, folds });
    }
    let largest_fold = n.div_ceil(folds);
    let max_k = n - largest_fold;
    let mut ks = candidates.to_vec();
    ks.sort_unstable();
    ks.dedup();
    match (ks.first(), ks.last()) {
        (Some(&0), _) => return Err(ModelError::InvalidCandidate { k: 0, max: max_k }),
        (_, Some(&k)) if k > max_k => return Err(ModelError::InvalidCandidate { k, max: max_k }),
        (None, _) => return Err(ModelError::InvalidCandidate { k: 0, max: max_k }),
        _ => {}
    }
    let k_max = *ks.last().expect("non-empty");

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);

    let mut sums = vec![0.0; ks.len()];
    let mut counts = vec![0usize; ks.len()];
    let mut start = 0;
    for fold in 0..folds {
        let len = base + usize::from(fold < extra);
        let mut held: Vec<usize> = order[start..start + len].to_vec();
        let mut train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + len..])
            .copied()
            .collect();
        start += len;
        held.sort_unstable();
        train.sort_unstable();

        let store = x.select(&train);
        let store_targets = store.targets().expect("selected with targets").to_vec();
        let actual: Vec<f64> = held.iter().map(|&i| targets[i]).collect();
        let mut predictions = vec![Vec::with_capacity(held.len()); ks.len()];
        for &i in &held {
            let neighbors = nearest(&store, x.row(i), k_max)?;
            let mut running = 0.0;
            let mut next = 0;
            for (rank, &j) in neighbors.iter().enumerate() {
                running += store_targets[j];
                while next < ks.len() && ks[next] == rank + 1 {
                    predictions[next].push(running / ks[next] as f64);
                    next += 1;
                }
            }
        }
        for (slot, preds) in predictions.iter().enumerate() {
            match r2_score(preds, &actual) {
                Ok(score) => {
                    sums[slot] += score;
                    counts[slot] += 1;
                }
                Err(ModelError::ZeroVariance) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let scores: Vec<(usize, Option<f64>)> = ks
        .iter()
        .zip(sums.iter().zip(&counts))
        .map(|(&k, (&s, &c))| (k, (c > 0).then(|| s / c as f64)))
        .collect();
    let mut chosen = (ks[0], None::<f64>);
    for &(k, score) in &scores {
        if let Some(s) = score {
            if chosen.1.is_none_or(|best| s > best) {
                chosen = (k, Some(s));
            }
        }
    }
    Ok(CvGridResult {
        scores,
        chosen_k: chosen.0,
    })
}
