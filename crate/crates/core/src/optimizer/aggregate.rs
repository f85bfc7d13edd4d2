use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{OptimizerError, Result, SmaPair, TrialRecord};

pub const DEFAULT_RATIO_WIDTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupBy {
    Pair,
    Short,
    Long,
    /// Groups by `floor((long / short) / width)`.
    RatioBucket(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupKey {
    Pair(SmaPair),
    Short(usize),
    Long(usize),
    /// Bucket index; the bucket covers ratios in `[index * width, (index + 1) * width)`.
    RatioBucket(i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAggregate {
    pub key: GroupKey,
    pub mean_outperformance_pct: f64,
    pub mean_volatility_ratio: f64,
    pub count: usize,
}

#[derive(Default)]
struct Acc {
    out: f64,
    vol: f64,
    n: usize,
}

/// Arithmetic means of both metrics per group, ordered by key.
pub fn aggregate(records: &[TrialRecord], group_by: GroupBy) -> Result<Vec<PairAggregate>> {
    if records.is_empty() {
        return Err(OptimizerError::EmptyInput);
    }
    if let GroupBy::RatioBucket(w) = group_by {
        if !(w.is_finite() && w > 0.0) {
            return Err(OptimizerError::InvalidBucketWidth(w));
        }
    }
    let mut groups: BTreeMap<GroupKey, Acc> = BTreeMap::new();
    for r in records {
        let key = match group_by {
            GroupBy::Pair => GroupKey::Pair(r.pair),
            GroupBy::Short => GroupKey::Short(r.pair.short()),
            GroupBy::Long => GroupKey::Long(r.pair.long()),
            GroupBy::RatioBucket(w) => {
                let ratio = r.pair.long() as f64 / r.pair.short() as f64;
                GroupKey::RatioBucket((ratio / w).floor() as i64)
            }
        };
        let acc = groups.entry(key).or_default();
        acc.out += r.outperformance_pct;
        acc.vol += r.volatility_ratio;
        acc.n += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(key, a)| PairAggregate {
            key,
            mean_outperformance_pct: a.out / a.n as f64,
            mean_volatility_ratio: a.vol / a.n as f64,
            count: a.n,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMetric {
    /// Highest mean outperformance first.
    OutperformanceDesc,
    /// Lowest mean volatility ratio first.
    VolatilityAsc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub rank: usize,
    pub pair: SmaPair,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingTable {
    pub metric: RankMetric,
    pub rows: Vec<RankRow>,
}

impl RankingTable {
    pub fn top(&self, n: usize) -> &[RankRow] {
        &self.rows[..n.min(self.rows.len())]
    }

    pub fn bottom(&self, n: usize) -> &[RankRow] {
        &self.rows[self.rows.len().saturating_sub(n)..]
    }
}

/// Ranks pair aggregates best-first; equal metric values fall back to `(short, long)` ascending.
pub fn rank(aggregates: &[PairAggregate], metric: RankMetric) -> Result<RankingTable> {
    if aggregates.is_empty() {
        return Err(OptimizerError::EmptyInput);
    }
    let mut rows = aggregates
        .iter()
        .map(|a| {
            let GroupKey::Pair(pair) = a.key else {
                return Err(OptimizerError::NotPairKeyed);
            };
            let value = match metric {
                RankMetric::OutperformanceDesc => a.mean_outperformance_pct,
                RankMetric::VolatilityAsc => a.mean_volatility_ratio,
            };
            Ok(RankRow { rank: 0, pair, value })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        let by_value = match metric {
            RankMetric::OutperformanceDesc => b.value.total_cmp(&a.value),
            RankMetric::VolatilityAsc => a.value.total_cmp(&b.value),
        };
        by_value.then(a.pair.cmp(&b.pair))
    });
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(RankingTable { metric, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterData {
    /// `(volatility_ratio, outperformance_pct)` per pair, in pair order.
    pub points: Vec<(f64, f64)>,
    /// Sample Pearson correlation; `None` when either coordinate has zero variance.
    pub correlation: Option<f64>,
}

/// One point per pair (metrics averaged across tickers) and their correlation.
pub fn scatter_export(records: &[TrialRecord]) -> Result<ScatterData> {
    let points: Vec<(f64, f64)> = aggregate(records, GroupBy::Pair)?
        .into_iter()
        .map(|a| (a.mean_volatility_ratio, a.mean_outperformance_pct))
        .collect();
    let correlation = pearson(&points);
    Ok(ScatterData { points, correlation })
}

fn pearson(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
