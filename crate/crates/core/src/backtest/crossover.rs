use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::report::BacktestReport;
use super::{BacktestError, CurveLabel, EquityCurve, Result, Strategy};
use crate::indicators::{align_crop, crossover_signals, difference, sma_of, DifferenceSeries, Signal, SignalSeries};
use crate::market_data::PriceSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Position {
    Bought,
    Flat,
}

/// Day-by-day record of a crossover run over the post-warmup window.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverTrace {
    pub dates: Vec<NaiveDate>,
    pub prices: Vec<f64>,
    pub difference: DifferenceSeries,
    pub signals: SignalSeries,
    /// Position held going into each day; the first entry is the initial position.
    pub entering: Vec<Position>,
    pub indicative: Vec<f64>,
}

/// Simulates the crossover strategy.
///
/// The window starts where the long average is first defined. The initial position is
/// Bought when the short average starts above the long one. On each later day a Bought
/// position collects that day's price change, including on the day a Sell fires; a Buy
/// only collects from the following day on.
pub fn trace_crossover(series: &PriceSeries, short: usize, long: usize) -> Result<CrossoverTrace> {
    if short == 0 || short >= long {
        return Err(BacktestError::PeriodOrderViolation { short, long });
    }
    if series.len() <= long {
        return Err(BacktestError::SeriesTooShort {
            needed: long + 1,
            found: series.len(),
            context: format!("{} bars for a {long}-day average", series.ticker()),
        });
    }
    let (s, l) = align_crop(&sma_of(series, short)?, &sma_of(series, long)?)?;
    let diff = difference(&s, &l)?;
    let signals = crossover_signals(&diff);

    let window = &series.bars()[long - 1..];
    let dates: Vec<NaiveDate> = window.iter().map(|b| b.date).collect();
    let prices: Vec<f64> = window.iter().map(|b| b.adj_close).collect();

    let mut position = if diff.values()[0].1 > 0.0 {
        Position::Bought
    } else {
        Position::Flat
    };
    let mut equity = prices[0];
    let mut entering = Vec::with_capacity(prices.len());
    let mut indicative = Vec::with_capacity(prices.len());
    entering.push(position);
    indicative.push(equity);
    for (i, signal) in signals.signals().enumerate().skip(1) {
        entering.push(position);
        if position == Position::Bought {
            equity += prices[i] - prices[i - 1];
        }
        match signal {
            Signal::Sell => position = Position::Flat,
            Signal::Buy => position = Position::Bought,
            Signal::Hold => {}
        }
        indicative.push(equity);
    }

    Ok(CrossoverTrace {
        dates,
        prices,
        difference: diff,
        signals,
        entering,
        indicative,
    })
}

pub fn run_crossover(series: &PriceSeries, short: usize, long: usize) -> Result<BacktestReport> {
    let trace = trace_crossover(series, short, long)?;
    let continuous = EquityCurve::new(
        CurveLabel::Continuous,
        trace.dates.iter().copied().zip(trace.prices.iter().copied()).collect(),
    );
    let indicative = EquityCurve::new(
        CurveLabel::Indicative,
        trace.dates.iter().copied().zip(trace.indicative.iter().copied()).collect(),
    );
    BacktestReport::build(
        series.ticker(),
        Strategy::Crossover { short, long },
        0,
        continuous,
        indicative,
        None,
    )
}
