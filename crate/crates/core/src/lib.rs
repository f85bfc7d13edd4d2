//! Backtesting and parameter search over daily adjusted-close price series.
//!
//! The crate is organized bottom-up:
//!
//! - [`market_data`]: bars, price series, the provider CSV format and an on-disk fetch cache.
//! - [`indicators`]: simple moving averages, warmup cropping and crossover detection.
//! - [`models`]: scaling, least squares, quadratic fits, k-NN regression and cross-validation.
//! - [`backtest`]: the crossover and walk-forward predictive strategies plus their metrics.
//! - [`optimizer`]: exhaustive SMA period grids, aggregation and rankings.
//! - [`plot`]: minimal SVG charts for equity curves and scatter data.

pub mod backtest;
pub mod indicators;
pub mod market_data;
pub mod models;
pub mod optimizer;
pub mod plot;

mod linalg;

pub use backtest::{BacktestConfig, BacktestError, BacktestReport, EquityCurve, Strategy};
pub use indicators::{IndicatorError, Signal, SmaSeries};
pub use market_data::{Bar, DataError, DateRange, PriceSeries};
pub use models::ModelError;
pub use optimizer::{OptimizerError, SmaPair, TrialRecord};
