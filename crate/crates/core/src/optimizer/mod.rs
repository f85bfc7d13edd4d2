//! Exhaustive search over SMA crossover periods.
//!
//! A grid run backtests every `(ticker, short, long)` combination, then the trial
//! metrics are averaged per pair (across tickers), per short period, per long period or
//! per long/short ratio bucket, ranked, and exported.

mod aggregate;
mod export;
mod grid;

pub use aggregate::{
    aggregate, rank, scatter_export, GroupBy, DEFAULT_RATIO_WIDTH, GroupKey, PairAggregate, RankMetric, RankRow, RankingTable,
    ScatterData,
};
pub use export::{
    aggregate_csv, parse_ranking_csv, parse_scatter_csv, parse_trials_csv, ranking_csv, scatter_csv,
    scatter_summary_json, skipped_csv, trials_csv, RANKING_CSV_HEADER, SCATTER_CSV_HEADER,
    SKIPPED_CSV_HEADER, TRIALS_CSV_HEADER,
};
pub use grid::{enumerate_pairs, run_grid, GridBounds, GridInput, GridOutcome, SkippedTrial};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("grid bounds produce no pair with long > short")]
    EmptyGrid,
    #[error("invalid grid bounds: {0}")]
    InvalidBounds(String),
    #[error("no ticker produced any trial")]
    NoDataForTicker,
    #[error("no records to aggregate")]
    EmptyInput,
    #[error("ranking requires aggregates keyed by pair")]
    NotPairKeyed,
    #[error("ratio bucket width must be positive, got {0}")]
    InvalidBucketWidth(f64),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("malformed csv at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, OptimizerError>;

/// Short/long SMA periods with `1 <= short < long`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SmaPair {
    short: usize,
    long: usize,
}

impl SmaPair {
    pub fn new(short: usize, long: usize) -> Option<Self> {
        (short >= 1 && short < long).then_some(Self { short, long })
    }

    pub fn short(&self) -> usize {
        self.short
    }

    pub fn long(&self) -> usize {
        self.long
    }
}

/// Metrics of one crossover backtest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub ticker: String,
    pub pair: SmaPair,
    pub outperformance_pct: f64,
    pub volatility_ratio: f64,
}
