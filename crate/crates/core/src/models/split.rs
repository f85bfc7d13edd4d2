use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FeatureMatrix, ModelError, Result};

/// Row indices of a train/test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded uniform partition of `0..rows` with `ceil(rows * test_fraction)` test rows.
/// At least one row always remains on each side.
pub fn split_indices(rows: usize, test_fraction: f64, seed: u64) -> Result<SplitIndices> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ModelError::InvalidFraction(test_fraction));
    }
    if rows < 2 {
        return Err(ModelError::TooFewRows {
            needed: 2,
            found: rows,
        });
    }
    // The small slack keeps e.g. 35 * 0.2 = 7.000000000000001 from rounding up to 8.
    let test_len = ((rows as f64 * test_fraction) - 1e-9).ceil().clamp(1.0, (rows - 1) as f64) as usize;
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = order[..test_len].to_vec();
    let mut train = order[test_len..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn train_test_split(
    x: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let idx = split_indices(x.nrows(), test_fraction, seed)?;
    Ok((x.select(&idx.train), x.select(&idx.test)))
}
