//! The walk-forward engine must only see bars dated before the day it is forecasting.

use std::cell::RefCell;

use chrono::{Days, NaiveDate};
use quantbench::backtest::{run_predictive_on, BarSource, PredictiveModel, PredictiveOptions};
use quantbench::{BacktestConfig, Bar, DateRange, PriceSeries};

#[derive(Debug, Clone, Copy)]
enum Event {
    Read(NaiveDate),
    Begin(NaiveDate),
    End(NaiveDate),
}

struct Recorder {
    inner: PriceSeries,
    log: RefCell<Vec<Event>>,
}

impl BarSource for Recorder {
    fn ticker(&self) -> &str {
        self.inner.ticker()
    }
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn date(&self, index: usize) -> NaiveDate {
        self.inner.bars()[index].date
    }
    fn bar(&self, index: usize) -> Bar {
        let bar = self.inner.bars()[index];
        self.log.borrow_mut().push(Event::Read(bar.date));
        bar
    }
    fn begin_forecast(&self, target: NaiveDate) {
        self.log.borrow_mut().push(Event::Begin(target));
    }
    fn end_forecast(&self, target: NaiveDate) {
        self.log.borrow_mut().push(Event::End(target));
    }
}

/// A read is a violation when it is dated on or after the next forecast target, which
/// covers both reads inside a forecast and reads that prefetch a future bar.
fn violations(log: &[Event]) -> (usize, usize) {
    let mut bad = 0;
    let mut forecasts = 0;
    let mut next_target = None;
    let mut closing = None;
    for event in log.iter().rev() {
        match *event {
            Event::Begin(t) => {
                assert_eq!(closing.take(), Some(t), "unbalanced forecast markers");
                next_target = Some(t);
                forecasts += 1;
            }
            Event::End(t) => closing = Some(t),
            Event::Read(d) => {
                if next_target.is_some_and(|t| d >= t) {
                    bad += 1;
                }
            }
        }
    }
    (bad, forecasts)
}

fn synthetic(n: usize) -> PriceSeries {
    let start = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
    let bars = (0..n)
        .map(|i| {
            let x = i as f64;
            let c = 60.0 + 0.03 * x + 4.0 * (x / 11.0).sin() + 1.5 * (x / 3.7).cos();
            Bar {
                date: start + Days::new(i as u64),
                open: c - 0.2,
                high: c + 0.6,
                low: c - 0.7,
                close: c,
                adj_close: c * 0.98,
                volume: 1_000 + (i as u64 * 37) % 500,
            }
        })
        .collect();
    PriceSeries::new("LOOK", bars).unwrap()
}

fn check(model: PredictiveModel, n: usize, train_days: u64) {
    let series = synthetic(n);
    let first = series.first_date();
    let training = DateRange::new(first, first + Days::new(train_days - 1)).unwrap();
    let evaluation = DateRange::new(first + Days::new(train_days), series.last_date()).unwrap();
    let config = BacktestConfig::predictive(model, training, evaluation, 3)
        .unwrap()
        .with_options(PredictiveOptions::default());
    let source = Recorder { inner: series, log: RefCell::new(Vec::new()) };
    let report = run_predictive_on(&source, &config).unwrap();
    let (bad, forecasts) = violations(&source.log.borrow());
    assert_eq!(bad, 0, "{model:?} read future bars");
    assert_eq!(forecasts, report.continuous.len() - 1);
}

#[test]
fn regression_never_reads_ahead() {
    check(PredictiveModel::LinearRegression, 400, 200);
}

#[test]
fn knn_never_reads_ahead() {
    check(PredictiveModel::Knn, 160, 100);
}

#[test]
fn detector_flags_a_prefetch() {
    let d = |i| NaiveDate::from_ymd_opt(2020, 1, i).unwrap();
    let log = [Event::Read(d(1)), Event::Read(d(2)), Event::Begin(d(2)), Event::End(d(2))];
    assert_eq!(violations(&log), (1, 1));
}
