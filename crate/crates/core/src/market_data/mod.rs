//! Daily bars, price series and the provider CSV format.

mod cache;
mod csv_io;
mod fetch;

pub use cache::HistoryCache;
pub use csv_io::{parse_csv, parse_csv_reader, serialize_csv, ParsedCsv, CSV_HEADER};
pub use fetch::{fetch_history, Provider, DEFAULT_PROVIDER_URL};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed csv{}: {reason}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    MalformedCsv { line: Option<usize>, reason: String },
    #[error("no bars available{}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    EmptySeries { context: Option<String> },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("bar dates must be strictly increasing ({previous} followed by {next})")]
    UnorderedDates { previous: NaiveDate, next: NaiveDate },
    #[error("invalid bar on {date}: {reason}")]
    InvalidBar { date: NaiveDate, reason: String },
    #[error("invalid date range: {start} is after {end}")]
    InvalidRange { start: NaiveDate, end: NaiveDate },
    #[error("unknown ticker {0:?}: provider returned no data")]
    UnknownTicker(String),
    #[error("network error fetching {ticker:?}: {reason}")]
    Network { ticker: String, reason: String },
    #[error("cache i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

/// One trading day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

impl Bar {
    fn check(&self) -> std::result::Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close, self.adj_close];
        if prices.iter().any(|p| !p.is_finite()) {
            return Err("non-finite price".into());
        }
        if self.adj_close <= 0.0 {
            return Err(format!("adjusted close must be positive, got {}", self.adj_close));
        }
        let body_low = self.open.min(self.close);
        let body_high = self.open.max(self.close);
        if self.low > body_low || body_high > self.high {
            return Err(format!(
                "expected low <= open/close <= high, got o={} h={} l={} c={}",
                self.open, self.high, self.low, self.close
            ));
        }
        Ok(())
    }

    /// Feature vector used by the predictive models.
    pub fn features(&self) -> [f64; 6] {
        [
            self.open,
            self.high,
            self.low,
            self.close,
            self.adj_close,
            self.volume as f64,
        ]
    }
}

/// Inclusive calendar range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateRange {
    start: NaiveDate,
    end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(DataError::InvalidRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

/// An immutable, non-empty, strictly date-ordered series of bars for one ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    bars: Vec<Bar>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, bars: Vec<Bar>) -> Result<Self> {
        let ticker = ticker.into();
        if bars.is_empty() {
            return Err(DataError::EmptySeries {
                context: Some(ticker),
            });
        }
        for pair in bars.windows(2) {
            let (previous, next) = (pair[0].date, pair[1].date);
            if previous == next {
                return Err(DataError::DuplicateDate(next));
            }
            if previous > next {
                return Err(DataError::UnorderedDates { previous, next });
            }
        }
        for bar in &bars {
            bar.check().map_err(|reason| DataError::InvalidBar {
                date: bar.date,
                reason,
            })?;
        }
        Ok(Self { ticker, bars })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.bars[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.bars[self.bars.len() - 1].date
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.bars.iter().map(|b| b.date)
    }

    /// Bars whose date lies within `range`, order preserved.
    pub fn slice(&self, range: DateRange) -> Result<PriceSeries> {
        let lo = self.bars.partition_point(|b| b.date < range.start);
        let hi = self.bars.partition_point(|b| b.date <= range.end);
        if lo >= hi {
            return Err(DataError::EmptySeries {
                context: Some(format!(
                    "{} has no bars between {} and {}",
                    self.ticker, range.start, range.end
                )),
            });
        }
        Ok(PriceSeries {
            ticker: self.ticker.clone(),
            bars: self.bars[lo..hi].to_vec(),
        })
    }

    pub fn adjusted_closes(&self) -> Vec<(NaiveDate, f64)> {
        self.bars.iter().map(|b| (b.date, b.adj_close)).collect()
    }

    /// Returns a copy with every price multiplied by `factor`. Volume is unchanged.
    pub fn scaled(&self, factor: f64) -> Result<PriceSeries> {
        let bars = self
            .bars
            .iter()
            .map(|b| Bar {
                open: b.open * factor,
                high: b.high * factor,
                low: b.low * factor,
                close: b.close * factor,
                adj_close: b.adj_close * factor,
                ..*b
            })
            .collect();
        PriceSeries::new(self.ticker.clone(), bars)
    }
}

/// Parses `YYYY-MM-DD` or `YYYY/M/D`.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let text = text.trim();
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(text, "%Y/%m/%d"))
        .ok()
}
