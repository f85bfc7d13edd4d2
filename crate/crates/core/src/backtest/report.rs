use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::Serialize;

use super::{outperformance_pct, volatility_ratio, BacktestError, CurveLabel, EquityCurve, Result, Strategy};
use crate::market_data::{parse_date, DataError};

pub const CURVES_CSV_HEADER: &str = "Date,Continuous,Indicative";

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub ticker: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub continuous_final: f64,
    pub indicative_final: f64,
    pub outperformance_pct: f64,
    /// `None` when the continuous curve is flat.
    pub volatility_ratio: Option<f64>,
    /// Mean held-out R² over walk-forward steps; predictive strategies only.
    pub avg_confidence: Option<f64>,
    pub continuous: EquityCurve,
    pub indicative: EquityCurve,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    ticker: &'a str,
    strategy: String,
    seed: u64,
    continuous_final: f64,
    indicative_final: f64,
    outperformance_pct: f64,
    volatility_ratio: Option<f64>,
    avg_confidence: Option<f64>,
    dates: Vec<String>,
    continuous: Vec<f64>,
    indicative: Vec<f64>,
}

impl BacktestReport {
    pub(crate) fn build(
        ticker: &str,
        strategy: Strategy,
        seed: u64,
        continuous: EquityCurve,
        indicative: EquityCurve,
        avg_confidence: Option<f64>,
    ) -> Result<Self> {
        let outperformance = outperformance_pct(&indicative, &continuous)?;
        let ratio = match volatility_ratio(&indicative, &continuous) {
            Ok(r) => Some(r),
            Err(BacktestError::ZeroDenominator | BacktestError::TooFewValues { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            ticker: ticker.to_string(),
            strategy,
            seed,
            continuous_final: continuous.last_value().unwrap_or(f64::NAN),
            indicative_final: indicative.last_value().unwrap_or(f64::NAN),
            outperformance_pct: outperformance,
            volatility_ratio: ratio,
            avg_confidence,
            continuous,
            indicative,
        })
    }

    pub fn window(&self) -> Option<(NaiveDate, NaiveDate)> {
        Some((self.continuous.points.first()?.0, self.continuous.points.last()?.0))
    }

    /// Human-readable summary block.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Ticker: {}", self.ticker);
        let _ = writeln!(out, "Strategy: {}", self.strategy);
        let _ = writeln!(out, "Seed: {}", self.seed);
        if let Some((start, end)) = self.window() {
            let _ = writeln!(out, "Window: {start} to {end} ({} days)", self.continuous.len());
        }
        let _ = writeln!(out, "Continuous Investing Final Price: {:.6}", self.continuous_final);
        let _ = writeln!(out, "Indicative Investing Final Price: {:.6}", self.indicative_final);
        if matches!(self.strategy, Strategy::Predictive(_)) {
            let _ = writeln!(out, "AVG Model Confidence: {}", fixed_or_na(self.avg_confidence));
        }
        let _ = writeln!(out, "Outperformance Percentage: {:.6}%", self.outperformance_pct);
        let _ = writeln!(out, "Volatility Ratio: {}", fixed_or_na(self.volatility_ratio));
        out
    }

    pub fn to_json(&self) -> String {
        let view = ReportJson {
            ticker: &self.ticker,
            strategy: self.strategy.to_string(),
            seed: self.seed,
            continuous_final: self.continuous_final,
            indicative_final: self.indicative_final,
            outperformance_pct: self.outperformance_pct,
            volatility_ratio: self.volatility_ratio,
            avg_confidence: self.avg_confidence,
            dates: self
                .continuous
                .dates()
                .map(|d| d.format("%Y-%m-%d").to_string())
                .collect(),
            continuous: self.continuous.values(),
            indicative: self.indicative.values(),
        };
        let mut text = serde_json::to_string_pretty(&view).expect("report serializes");
        text.push('\n');
        text
    }

    /// Both curves as `Date,Continuous,Indicative` with round-trip float formatting.
    pub fn curves_csv(&self) -> String {
        let mut out = String::with_capacity(self.continuous.len() * 40);
        out.push_str(CURVES_CSV_HEADER);
        out.push('\n');
        for (c, i) in self.continuous.points.iter().zip(&self.indicative.points) {
            let _ = writeln!(out, "{},{},{}", c.0.format("%Y-%m-%d"), c.1, i.1);
        }
        out
    }
}

fn fixed_or_na(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

/// Reads a file written by [`BacktestReport::curves_csv`].
pub fn parse_curves_csv(text: &str) -> std::result::Result<(EquityCurve, EquityCurve), DataError> {
    let mut lines = text.lines();
    let malformed = |line: usize, reason: String| DataError::MalformedCsv {
        line: Some(line),
        reason,
    };
    if lines.next().map(str::trim) != Some(CURVES_CSV_HEADER) {
        return Err(malformed(1, format!("expected header {CURVES_CSV_HEADER:?}")));
    }
    let mut continuous = Vec::new();
    let mut indicative = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let (date, c, ind) = match fields.as_slice() {
            [d, c, i] => (
                parse_date(d),
                c.parse::<f64>().ok(),
                i.parse::<f64>().ok(),
            ),
            _ => (None, None, None),
        };
        match (date, c, ind) {
            (Some(d), Some(c), Some(ind)) => {
                continuous.push((d, c));
                indicative.push((d, ind));
            }
            _ => return Err(malformed(i + 2, format!("bad row {line:?}"))),
        }
    }
    Ok((
        EquityCurve::new(CurveLabel::Continuous, continuous),
        EquityCurve::new(CurveLabel::Indicative, indicative),
    ))
}
