//! Simple moving averages and crossover detection.
//!
//! An SMA of period `n` has no value for the first `n - 1` bars, so its series starts at
//! the source's `n`-th date. Comparing two SMAs requires cropping both to the later start
//! ([`align_crop`]); the sign of `short - long` then drives [`crossover_signals`].

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::PriceSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("moving average period must be at least 1")]
    ZeroPeriod,
    #[error("period {period} is longer than the series ({len} prices)")]
    PeriodTooLong { period: usize, len: usize },
    #[error("short period {short} must be smaller than long period {long}")]
    PeriodOrderViolation { short: usize, long: usize },
    #[error("moving averages were not computed from the same price series")]
    MismatchedSource,
    #[error("series are not aligned on identical dates")]
    MisalignedInputs,
}

pub type Result<T> = std::result::Result<T, IndicatorError>;

#[derive(Debug, Clone, PartialEq)]
pub struct SmaSeries {
    period: usize,
    values: Vec<(NaiveDate, f64)>,
    source_ticker: String,
}

impl SmaSeries {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn values(&self) -> &[(NaiveDate, f64)] {
        &self.values
    }

    pub fn source_ticker(&self) -> &str {
        &self.source_ticker
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.values.first().map(|v| v.0)
    }

    fn last_date(&self) -> Option<NaiveDate> {
        self.values.last().map(|v| v.0)
    }
}

/// Moving average of `period` prices ending at each date from the `period`-th price on.
///
/// Uses a compensated rolling sum, so the cost is linear in the series length regardless
/// of `period`.
pub fn sma(prices: &[(NaiveDate, f64)], period: usize) -> Result<SmaSeries> {
    sma_with_source(prices, period, String::new())
}

/// [`sma`] over a series' adjusted closes, remembering the ticker.
pub fn sma_of(series: &PriceSeries, period: usize) -> Result<SmaSeries> {
    sma_with_source(&series.adjusted_closes(), period, series.ticker().to_string())
}

fn sma_with_source(
    prices: &[(NaiveDate, f64)],
    period: usize,
    source_ticker: String,
) -> Result<SmaSeries> {
    if period == 0 {
        return Err(IndicatorError::ZeroPeriod);
    }
    if period > prices.len() {
        return Err(IndicatorError::PeriodTooLong {
            period,
            len: prices.len(),
        });
    }
    let n = period as f64;
    let mut sum = NeumaierSum::default();
    for &(_, p) in &prices[..period - 1] {
        sum.add(p);
    }
    let mut values = Vec::with_capacity(prices.len() - period + 1);
    for i in period - 1..prices.len() {
        sum.add(prices[i].1);
        values.push((prices[i].0, sum.value() / n));
        sum.add(-prices[i + 1 - period].1);
    }
    Ok(SmaSeries {
        period,
        values,
        source_ticker,
    })
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Crops both averages to start at the long average's first date.
pub fn align_crop(short: &SmaSeries, long: &SmaSeries) -> Result<(SmaSeries, SmaSeries)> {
    if short.period >= long.period {
        return Err(IndicatorError::PeriodOrderViolation {
            short: short.period,
            long: long.period,
        });
    }
    if short.source_ticker != long.source_ticker || short.last_date() != long.last_date() {
        return Err(IndicatorError::MismatchedSource);
    }
    let Some(start) = long.first_date() else {
        return Err(IndicatorError::MismatchedSource);
    };
    // Already aligned inputs are accepted as-is.
    let offset = short
        .values
        .partition_point(|v| v.0 < start);
    let cropped = &short.values[offset..];
    if cropped.len() != long.values.len()
        || cropped.iter().zip(&long.values).any(|(a, b)| a.0 != b.0)
    {
        return Err(IndicatorError::MismatchedSource);
    }
    Ok((
        SmaSeries {
            period: short.period,
            values: cropped.to_vec(),
            source_ticker: short.source_ticker.clone(),
        },
        long.clone(),
    ))
}

/// `short - long` per date. Positive values mean the short average is above the long one.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSeries {
    values: Vec<(NaiveDate, f64)>,
}

impl DifferenceSeries {
    pub fn new(values: Vec<(NaiveDate, f64)>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[(NaiveDate, f64)] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn difference(short: &SmaSeries, long: &SmaSeries) -> Result<DifferenceSeries> {
    if short.values.len() != long.values.len()
        || short.values.iter().zip(&long.values).any(|(a, b)| a.0 != b.0)
    {
        return Err(IndicatorError::MisalignedInputs);
    }
    Ok(DifferenceSeries {
        values: short
            .values
            .iter()
            .zip(&long.values)
            .map(|(s, l)| (s.0, s.1 - l.1))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Signal {
    Buy,
    Sell,
    Hold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    events: Vec<(NaiveDate, Signal)>,
}

impl SignalSeries {
    pub fn events(&self) -> &[(NaiveDate, Signal)] {
        &self.events
    }

    pub fn signals(&self) -> impl Iterator<Item = Signal> + '_ {
        self.events.iter().map(|e| e.1)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Buy where the difference turns from negative to positive, Sell for the reverse.
///
/// A day with an exact zero difference keeps the previous day's sign, so a crossing that
/// touches zero on the way produces exactly one event.
pub fn crossover_signals(diff: &DifferenceSeries) -> SignalSeries {
    let mut events = Vec::with_capacity(diff.len());
    let mut prev_sign = 0i8;
    for (i, &(date, value)) in diff.values.iter().enumerate() {
        let sign = match value {
            v if v > 0.0 => 1,
            v if v < 0.0 => -1,
            _ => prev_sign,
        };
        let event = match (i, prev_sign, sign) {
            (0, _, _) => Signal::Hold,
            (_, -1, 1) => Signal::Buy,
            (_, 1, -1) => Signal::Sell,
            _ => Signal::Hold,
        };
        events.push((date, event));
        prev_sign = sign;
    }
    SignalSeries { events }
}
