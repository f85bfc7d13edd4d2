//! Walk-forward one-day-ahead forecasting strategies.
//!
//! For each evaluation day after the first, the model is refit from scratch on every bar
//! from the training start up to (not including) that day, using each bar's
//! open/high/low/close/adjusted close/volume as features and the next bar's adjusted close
//! as the target. The strategy holds the stock for the day when the forecast is above the
//! last known adjusted close.

use chrono::NaiveDate;

use super::report::BacktestReport;
use super::{
    BacktestConfig, BacktestError, CurveLabel, EquityCurve, KnnScaling, PredictiveModel,
    PredictiveOptions, Result, Strategy,
};
use crate::market_data::{Bar, PriceSeries};
use crate::models::{
    apply_scaler, fit_knn, fit_linear_with, fit_scaler, grid_search_k, predict_knn, predict_linear,
    r2_score, split_indices, FeatureMatrix, LinearOptions, ModelError, ScalerKind,
};

/// Read access to a dated bar sequence.
///
/// The walk-forward engine announces each forecast with [`begin_forecast`] and
/// [`end_forecast`]; between the two calls it only reads bars dated before the target.
/// It never reads a bar dated after the most recently announced target.
///
/// [`begin_forecast`]: BarSource::begin_forecast
/// [`end_forecast`]: BarSource::end_forecast
pub trait BarSource {
    fn ticker(&self) -> &str;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Trading calendar; dates carry no price information.
    fn date(&self, index: usize) -> NaiveDate;
    fn bar(&self, index: usize) -> Bar;
    fn begin_forecast(&self, _target: NaiveDate) {}
    fn end_forecast(&self, _target: NaiveDate) {}
}

impl BarSource for PriceSeries {
    fn ticker(&self) -> &str {
        PriceSeries::ticker(self)
    }

    fn len(&self) -> usize {
        PriceSeries::len(self)
    }

    fn date(&self, index: usize) -> NaiveDate {
        self.bars()[index].date
    }

    fn bar(&self, index: usize) -> Bar {
        self.bars()[index]
    }
}

pub fn run_predictive(series: &PriceSeries, config: &BacktestConfig) -> Result<BacktestReport> {
    run_predictive_on(series, config)
}

pub fn run_predictive_on<S: BarSource + ?Sized>(
    source: &S,
    config: &BacktestConfig,
) -> Result<BacktestReport> {
    let Strategy::Predictive(model) = config.strategy else {
        return Err(BacktestError::InvalidConfig(
            "predictive run requires a predictive strategy".into(),
        ));
    };
    let (Some(training), Some(evaluation)) = (config.training, config.evaluation) else {
        return Err(BacktestError::InvalidConfig(
            "predictive run requires training and evaluation ranges".into(),
        ));
    };
    let opts = &config.options;
    let dates: Vec<NaiveDate> = (0..source.len()).map(|i| source.date(i)).collect();

    let training_bars = dates.iter().filter(|d| training.contains(**d)).count();
    if training_bars < opts.min_training_bars {
        return Err(BacktestError::SeriesTooShort {
            needed: opts.min_training_bars,
            found: training_bars,
            context: format!("{} training bars in {}..{}", source.ticker(), training.start(), training.end()),
        });
    }
    let history_start = dates.partition_point(|d| *d < training.start());
    let eval_lo = dates.partition_point(|d| *d < evaluation.start());
    let eval_hi = dates.partition_point(|d| *d <= evaluation.end());
    if eval_lo >= eval_hi {
        return Err(BacktestError::SeriesTooShort {
            needed: 1,
            found: 0,
            context: format!("{} evaluation bars in {}..{}", source.ticker(), evaluation.start(), evaluation.end()),
        });
    }

    // Everything up to and including the first evaluation day is known at the start.
    let mut history: Vec<Bar> = (history_start..=eval_lo).map(|i| source.bar(i)).collect();
    let first = history[history.len() - 1];
    let mut continuous = vec![(first.date, first.adj_close)];
    let mut indicative = vec![(first.date, first.adj_close)];
    let mut equity = first.adj_close;
    let mut confidences = Vec::new();

    for (day, index) in (eval_lo + 1..eval_hi).enumerate().map(|(i, idx)| (i + 1, idx)) {
        let target = dates[index];
        source.begin_forecast(target);
        let step = forecast(&history, model, opts, step_seed(config.seed, day)).map_err(|source| {
            BacktestError::Model {
                date: target,
                day,
                source,
            }
        });
        source.end_forecast(target);
        let step = step?;
        if let Some(c) = step.confidence {
            confidences.push(c);
        }
        let last = history[history.len() - 1];
        let revealed = source.bar(index);
        if step.prediction > last.adj_close {
            equity += revealed.adj_close - last.adj_close;
        }
        continuous.push((revealed.date, revealed.adj_close));
        indicative.push((revealed.date, equity));
        history.push(revealed);
    }

    let avg_confidence =
        (!confidences.is_empty()).then(|| confidences.iter().sum::<f64>() / confidences.len() as f64);
    BacktestReport::build(
        source.ticker(),
        config.strategy,
        config.seed,
        EquityCurve::new(CurveLabel::Continuous, continuous),
        EquityCurve::new(CurveLabel::Indicative, indicative),
        avg_confidence,
    )
}

struct Forecast {
    prediction: f64,
    confidence: Option<f64>,
}

fn forecast(
    history: &[Bar],
    model: PredictiveModel,
    opts: &PredictiveOptions,
    seed: u64,
) -> std::result::Result<Forecast, ModelError> {
    let raw = FeatureMatrix::new(history.iter().map(|b| b.features().to_vec()).collect(), None)?;
    let mut scaled = apply_scaler(&fit_scaler(ScalerKind::Standardize, &raw)?, &raw)?;
    if model == PredictiveModel::Knn && opts.knn_scaling == KnnScaling::MinMax {
        scaled = apply_scaler(&fit_scaler(ScalerKind::MinMax, &scaled)?, &scaled)?;
    }
    let h = history.len();
    let query = scaled.row(h - 1).to_vec();
    let targets: Vec<f64> = history[1..].iter().map(|b| b.adj_close).collect();
    let labelled = scaled.select(&(0..h - 1).collect::<Vec<_>>()).with_targets(targets)?;
    let split = split_indices(labelled.nrows(), opts.test_fraction, seed)?;
    let train = labelled.select(&split.train);
    let test = labelled.select(&split.test);
    let actual = test.targets().expect("labelled");

    let (prediction, held_out) = match model {
        PredictiveModel::LinearRegression => {
            let fitted = fit_linear_with(&train, LinearOptions { ridge: opts.ridge })?;
            let held_out = test
                .rows()
                .map(|r| predict_linear(&fitted, r))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (predict_linear(&fitted, &query)?, held_out)
        }
        PredictiveModel::Knn => {
            let cv = grid_search_k(&train, &opts.k_candidates, opts.folds, seed)?;
            let fitted = fit_knn(&train, cv.chosen_k)?;
            let held_out = test
                .rows()
                .map(|r| predict_knn(&fitted, r))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (predict_knn(&fitted, &query)?, held_out)
        }
    };
    let confidence = match r2_score(&held_out, actual) {
        Ok(score) => Some(score),
        Err(ModelError::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    Ok(Forecast {
        prediction,
        confidence,
    })
}

/// Distinct, reproducible split seed for each walk-forward step.
fn step_seed(seed: u64, day: usize) -> u64 {
    let mut z = seed.wrapping_add((day as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
