use rayon::prelude::*;

use super::{OptimizerError, Result, SmaPair, TrialRecord};
use crate::backtest::run_crossover;
use crate::market_data::{DateRange, PriceSeries};

/// Inclusive period bounds. The defaults cover shorts 5..=49 and longs 10..=149.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridBounds {
    pub short_min: usize,
    pub short_max: usize,
    pub long_min: usize,
    pub long_max: usize,
}

impl Default for GridBounds {
    fn default() -> Self {
        Self {
            short_min: 5,
            short_max: 49,
            long_min: 10,
            long_max: 149,
        }
    }
}

/// Every `(short, long)` within bounds with `long > short`, in lexicographic order.
pub fn enumerate_pairs(bounds: GridBounds) -> Result<Vec<SmaPair>> {
    let GridBounds {
        short_min,
        short_max,
        long_min,
        long_max,
    } = bounds;
    if short_min == 0 || long_min == 0 {
        return Err(OptimizerError::InvalidBounds("periods must be positive".into()));
    }
    if short_min > short_max || long_min > long_max {
        return Err(OptimizerError::InvalidBounds(format!(
            "expected min <= max, got short {short_min}..={short_max}, long {long_min}..={long_max}"
        )));
    }
    let pairs: Vec<SmaPair> = (short_min..=short_max)
        .flat_map(|s| (long_min.max(s + 1)..=long_max).filter_map(move |l| SmaPair::new(s, l)))
        .collect();
    if pairs.is_empty() {
        return Err(OptimizerError::EmptyGrid);
    }
    Ok(pairs)
}

/// A ticker's data, or the reason it could not be loaded.
#[derive(Debug, Clone)]
pub enum GridInput {
    Loaded(PriceSeries),
    Unavailable { ticker: String, reason: String },
}

impl GridInput {
    pub fn ticker(&self) -> &str {
        match self {
            GridInput::Loaded(s) => s.ticker(),
            GridInput::Unavailable { ticker, .. } => ticker,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedTrial {
    pub ticker: String,
    pub pair: SmaPair,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    /// Sorted by `(ticker, short, long)`.
    pub records: Vec<TrialRecord>,
    /// Sorted the same way; `records.len() + skipped.len()` equals tickers × pairs.
    pub skipped: Vec<SkippedTrial>,
}

/// Runs a crossover backtest for every `(ticker, pair)` on a pool of `workers` threads.
///
/// Failed combinations are reported in [`GridOutcome::skipped`] instead of aborting the
/// grid. The result does not depend on the worker count.
pub fn run_grid(
    inputs: &[GridInput],
    range: Option<DateRange>,
    pairs: &[SmaPair],
    workers: usize,
) -> Result<GridOutcome> {
    let windows: Vec<std::result::Result<PriceSeries, (String, String)>> = inputs
        .iter()
        .map(|input| match input {
            GridInput::Loaded(series) => match range {
                Some(r) => series
                    .slice(r)
                    .map_err(|e| (series.ticker().to_string(), e.to_string())),
                None => Ok(series.clone()),
            },
            GridInput::Unavailable { ticker, reason } => Err((ticker.clone(), reason.clone())),
        })
        .collect();

    let tasks: Vec<(usize, SmaPair)> = (0..windows.len())
        .flat_map(|t| pairs.iter().map(move |&p| (t, p)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| OptimizerError::Pool(e.to_string()))?;
    let results: Vec<std::result::Result<TrialRecord, SkippedTrial>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(t, pair)| match &windows[t] {
                Ok(series) => trial(series, pair),
                Err((ticker, reason)) => Err(SkippedTrial {
                    ticker: ticker.clone(),
                    pair,
                    reason: format!("data unavailable: {reason}"),
                }),
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(skip) => skipped.push(skip),
        }
    }
    if records.is_empty() {
        return Err(OptimizerError::NoDataForTicker);
    }
    records.sort_by(|a, b| (&a.ticker, a.pair).cmp(&(&b.ticker, b.pair)));
    skipped.sort_by(|a, b| (&a.ticker, a.pair).cmp(&(&b.ticker, b.pair)));
    Ok(GridOutcome { records, skipped })
}

fn trial(series: &PriceSeries, pair: SmaPair) -> std::result::Result<TrialRecord, SkippedTrial> {
    let skip = |reason: String| SkippedTrial {
        ticker: series.ticker().to_string(),
        pair,
        reason,
    };
    let report = run_crossover(series, pair.short(), pair.long()).map_err(|e| skip(e.to_string()))?;
    let volatility_ratio = report
        .volatility_ratio
        .ok_or_else(|| skip("volatility ratio undefined (flat continuous curve)".into()))?;
    Ok(TrialRecord {
        ticker: series.ticker().to_string(),
        pair,
        outperformance_pct: report.outperformance_pct,
        volatility_ratio,
    })
}
