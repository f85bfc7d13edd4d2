//! Strategy simulation and the comparison metrics.
//!
//! Every run produces two equity curves over the same evaluation window: *continuous*
//! (buy on day one and hold, i.e. the raw adjusted close) and *indicative* (follow the
//! strategy, long one unit or flat). Both start at the first adjusted close of the window.

mod crossover;
mod metrics;
mod predictive;
mod report;

pub use crossover::{run_crossover, trace_crossover, CrossoverTrace, Position};
pub use metrics::{outperformance_pct, std_dev, volatility_ratio};
pub use predictive::{run_predictive, run_predictive_on, BarSource};
pub use report::{parse_curves_csv, BacktestReport, CURVES_CSV_HEADER};

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::IndicatorError;
use crate::market_data::{DataError, DateRange, PriceSeries};
use crate::models::{ModelError, DEFAULT_K_CANDIDATES, DEFAULT_RIDGE};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("need at least {needed} values, got {found}")]
    TooFewValues { needed: usize, found: usize },
    #[error("equity curves differ in length or dates")]
    MisalignedCurves,
    #[error("continuous curve is constant; volatility ratio undefined")]
    ZeroDenominator,
    #[error("series too short: {context} (need {needed}, have {found})")]
    SeriesTooShort {
        needed: usize,
        found: usize,
        context: String,
    },
    #[error("short period {short} must be smaller than long period {long}")]
    PeriodOrderViolation { short: usize, long: usize },
    #[error("invalid backtest configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("model failure predicting {date} (evaluation day {day}): {source}")]
    Model {
        date: NaiveDate,
        day: usize,
        source: ModelError,
    },
}

pub type Result<T> = std::result::Result<T, BacktestError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveLabel {
    Continuous,
    Indicative,
}

/// Dated portfolio values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquityCurve {
    pub label: CurveLabel,
    pub points: Vec<(NaiveDate, f64)>,
}

impl EquityCurve {
    pub fn new(label: CurveLabel, points: Vec<(NaiveDate, f64)>) -> Self {
        Self { label, points }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last_value(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictiveModel {
    LinearRegression,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Crossover { short: usize, long: usize },
    Predictive(PredictiveModel),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Crossover { short, long } => write!(f, "crossover({short},{long})"),
            Strategy::Predictive(PredictiveModel::LinearRegression) => f.write_str("linreg"),
            Strategy::Predictive(PredictiveModel::Knn) => f.write_str("knn"),
        }
    }
}

/// How k-NN features are scaled after the standardization shared with regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KnnScaling {
    /// Standardize, then map each column onto `[0, 1]`.
    MinMax,
    /// Standardized features only.
    StandardizeOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveOptions {
    pub test_fraction: f64,
    pub folds: usize,
    pub k_candidates: Vec<usize>,
    pub knn_scaling: KnnScaling,
    pub ridge: Option<f64>,
    pub min_training_bars: usize,
}

impl Default for PredictiveOptions {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            folds: 5,
            k_candidates: DEFAULT_K_CANDIDATES.to_vec(),
            knn_scaling: KnnScaling::MinMax,
            ridge: Some(DEFAULT_RIDGE),
            min_training_bars: 30,
        }
    }
}

/// Everything a run needs besides the price data. The forecast horizon is one day.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub strategy: Strategy,
    /// Required for predictive strategies; ignored by the crossover.
    pub training: Option<DateRange>,
    /// `None` evaluates over the whole series.
    pub evaluation: Option<DateRange>,
    pub seed: u64,
    pub options: PredictiveOptions,
}

impl BacktestConfig {
    pub fn crossover(short: usize, long: usize) -> Result<Self> {
        if short == 0 || short >= long {
            return Err(BacktestError::PeriodOrderViolation { short, long });
        }
        Ok(Self {
            strategy: Strategy::Crossover { short, long },
            training: None,
            evaluation: None,
            seed: 0,
            options: PredictiveOptions::default(),
        })
    }

    pub fn predictive(
        model: PredictiveModel,
        training: DateRange,
        evaluation: DateRange,
        seed: u64,
    ) -> Result<Self> {
        if training.end() >= evaluation.start() {
            return Err(BacktestError::InvalidConfig(format!(
                "training must end before evaluation starts ({} >= {})",
                training.end(),
                evaluation.start()
            )));
        }
        Ok(Self {
            strategy: Strategy::Predictive(model),
            training: Some(training),
            evaluation: Some(evaluation),
            seed,
            options: PredictiveOptions::default(),
        })
    }

    pub fn with_evaluation(mut self, range: DateRange) -> Self {
        self.evaluation = Some(range);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_options(mut self, options: PredictiveOptions) -> Self {
        self.options = options;
        self
    }
}

/// Runs whichever strategy `config` names.
pub fn run_backtest(series: &PriceSeries, config: &BacktestConfig) -> Result<BacktestReport> {
    match config.strategy {
        Strategy::Crossover { short, long } => {
            let window = match config.evaluation {
                Some(range) => series.slice(range)?,
                None => series.clone(),
            };
            let mut report = run_crossover(&window, short, long)?;
            report.seed = config.seed;
            Ok(report)
        }
        Strategy::Predictive(_) => run_predictive(series, config),
    }
}
