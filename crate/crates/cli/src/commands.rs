use std::fs;
use std::io::Write;
use std::path::Path;

use quantbench::backtest::{run_backtest, BacktestConfig, BacktestError, KnnScaling, PredictiveModel, PredictiveOptions};
use quantbench::market_data::{fetch_history, parse_csv, serialize_csv, DataError, HistoryCache, PriceSeries, Provider};
use quantbench::optimizer::{
    aggregate, aggregate_csv, enumerate_pairs, rank, ranking_csv, run_grid, scatter_csv, scatter_export,
    scatter_summary_json, skipped_csv, trials_csv, GridInput, GroupBy, OptimizerError, RankMetric, RankingTable,
};
use quantbench::plot;

use crate::args::{Format, KnnScalingArg, StrategyArg};
use crate::config::{BacktestPlan, FetchConfig, OptimizePlan, Shared, StrategyPlan};
use crate::CliError;

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<BacktestError> for CliError {
    fn from(e: BacktestError) -> Self {
        match e {
            BacktestError::Model { .. } => CliError::Model(e.to_string()),
            BacktestError::InvalidConfig(_) | BacktestError::PeriodOrderViolation { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn io(e: std::io::Error) -> CliError {
    CliError::Data(format!("cannot write output: {e}"))
}

fn sources(shared: &Shared) -> (Provider, HistoryCache) {
    (Provider::new(shared.provider_url.clone()), HistoryCache::new(shared.cache_dir.clone()))
}

pub fn fetch(plan: &FetchConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (provider, cache) = sources(&plan.shared);
    let mut failures = Vec::new();
    for ticker in &plan.shared.tickers {
        match fetch_history(ticker, plan.range, &provider, &cache) {
            Ok(series) => {
                writeln!(
                    out,
                    "{ticker}: {} rows, {} to {} -> {}",
                    series.len(),
                    series.first_date(),
                    series.last_date(),
                    cache.path_for(ticker, plan.range).display()
                )
                .map_err(io)?;
                if plan.shared.out_dir_given {
                    let dir = &plan.shared.out_dir;
                    if plan.shared.writes(Format::Csv) {
                        write_file(dir, &format!("{ticker}.csv"), &serialize_csv(&series))?;
                    }
                    if plan.shared.writes(Format::Json) {
                        let json = serde_json::to_string_pretty(series.bars()).expect("bars serialize");
                        write_file(dir, &format!("{ticker}.json"), &(json + "\n"))?;
                    }
                }
            }
            Err(e) => {
                let _ = writeln!(err, "{ticker}: {e}");
                failures.push(ticker.clone());
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!("failed to fetch {}", failures.join(", "))))
    }
}

fn load_series(plan: &BacktestPlan) -> Result<PriceSeries, CliError> {
    match &plan.csv {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            Ok(parse_csv(&plan.ticker, &text)?.series.slice(plan.data_range)?)
        }
        None => {
            let (provider, cache) = sources(&plan.shared);
            Ok(fetch_history(&plan.ticker, plan.data_range, &provider, &cache)?)
        }
    }
}

pub fn backtest(plan: &BacktestPlan, out: &mut dyn Write, _err: &mut dyn Write) -> Result<(), CliError> {
    let seed = plan.shared.seed;
    let config = match plan.strategy {
        StrategyPlan::Crossover { short, long } => {
            BacktestConfig::crossover(short, long)?.with_evaluation(plan.evaluation).with_seed(seed)
        }
        StrategyPlan::Predictive { model, training, scaling } => {
            let model = match model {
                StrategyArg::Knn => PredictiveModel::Knn,
                _ => PredictiveModel::LinearRegression,
            };
            let options = PredictiveOptions {
                knn_scaling: match scaling {
                    KnnScalingArg::Minmax => KnnScaling::MinMax,
                    KnnScalingArg::StandardizeOnly => KnnScaling::StandardizeOnly,
                },
                ..PredictiveOptions::default()
            };
            BacktestConfig::predictive(model, training, plan.evaluation, seed)?.with_options(options)
        }
    };
    let series = load_series(plan)?;
    let report = run_backtest(&series, &config)?;

    let text = report.render_text();
    let dir = &plan.shared.out_dir;
    write_file(dir, "report.txt", &text)?;
    if plan.shared.writes(Format::Json) {
        write_file(dir, "report.json", &report.to_json())?;
    }
    if plan.shared.writes(Format::Csv) {
        write_file(dir, "curves.csv", &report.curves_csv())?;
    }
    if plan.shared.plot {
        let (c, i) = (report.continuous.values(), report.indicative.values());
        let title = format!("{} {}", report.ticker, report.strategy);
        let svg = plot::line_chart(&title, &[("Continuous", &c), ("Indicative", &i)]);
        write_file(dir, "equity.svg", &svg)?;
    }
    out.write_all(text.as_bytes()).map_err(io)
}

fn optimizer_error(e: OptimizerError) -> CliError {
    match e {
        OptimizerError::EmptyGrid | OptimizerError::InvalidBounds(_) | OptimizerError::InvalidBucketWidth(_) => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Data(e.to_string()),
    }
}

fn print_ranking(out: &mut dyn Write, title: &str, table: &RankingTable, n: usize) -> std::io::Result<()> {
    writeln!(out, "{title}")?;
    writeln!(out, "Rank Short Long Metric")?;
    let top = table.top(n);
    let bottom = table.bottom(n);
    for row in top {
        writeln!(out, "{} {} {} {:.8}", row.rank, row.pair.short(), row.pair.long(), row.value)?;
    }
    let skip_to = top.last().map_or(0, |r| r.rank);
    if bottom.first().is_some_and(|r| r.rank > skip_to + 1) {
        writeln!(out, "...")?;
    }
    for row in bottom.iter().filter(|r| r.rank > skip_to) {
        writeln!(out, "{} {} {} {:.8}", row.rank, row.pair.short(), row.pair.long(), row.value)?;
    }
    writeln!(out)
}

pub fn optimize(plan: &OptimizePlan, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let pairs = enumerate_pairs(plan.bounds).map_err(optimizer_error)?;
    let (provider, cache) = sources(&plan.shared);
    let inputs: Vec<GridInput> = plan
        .shared
        .tickers
        .iter()
        .map(|t| match fetch_history(t, plan.range, &provider, &cache) {
            Ok(series) => GridInput::Loaded(series),
            Err(e) => {
                let _ = writeln!(err, "{t}: {e}");
                GridInput::Unavailable { ticker: t.clone(), reason: e.to_string() }
            }
        })
        .collect();
    let outcome = run_grid(&inputs, None, &pairs, plan.workers).map_err(optimizer_error)?;

    let by_pair = aggregate(&outcome.records, GroupBy::Pair).map_err(optimizer_error)?;
    let by_out = rank(&by_pair, RankMetric::OutperformanceDesc).map_err(optimizer_error)?;
    let by_vol = rank(&by_pair, RankMetric::VolatilityAsc).map_err(optimizer_error)?;
    let ratio = GroupBy::RatioBucket(plan.ratio_width);
    let scatter = scatter_export(&outcome.records).map_err(optimizer_error)?;

    let dir = &plan.shared.out_dir;
    write_file(dir, "trials.csv", &trials_csv(&outcome.records))?;
    write_file(dir, "ranking_outperformance.csv", &ranking_csv(&by_out))?;
    write_file(dir, "ranking_volatility.csv", &ranking_csv(&by_vol))?;
    for (name, group) in [("aggregate_short.csv", GroupBy::Short), ("aggregate_long.csv", GroupBy::Long), ("aggregate_ratio.csv", ratio)] {
        let aggs = aggregate(&outcome.records, group).map_err(optimizer_error)?;
        write_file(dir, name, &aggregate_csv(&aggs, group))?;
    }
    write_file(dir, "scatter.csv", &scatter_csv(&scatter))?;
    write_file(dir, "scatter_summary.json", &scatter_summary_json(&scatter))?;
    write_file(dir, "skipped.csv", &skipped_csv(&outcome.skipped))?;
    if plan.shared.format == Some(Format::Json) {
        let json = serde_json::to_string_pretty(&outcome.records).expect("records serialize");
        write_file(dir, "trials.json", &(json + "\n"))?;
    }
    if plan.shared.plot {
        let svg = plot::scatter_chart(
            "Volatility ratio vs outperformance",
            "volatility ratio",
            "outperformance %",
            &scatter.points,
        );
        write_file(dir, "scatter.svg", &svg)?;
    }

    let requested = plan.shared.tickers.len() * pairs.len();
    (|| -> std::io::Result<()> {
        writeln!(
            out,
            "Trials: {} completed, {} skipped, {} requested ({} tickers x {} pairs)",
            outcome.records.len(),
            outcome.skipped.len(),
            requested,
            plan.shared.tickers.len(),
            pairs.len()
        )?;
        writeln!(out)?;
        print_ranking(out, "Average Outperformance Percentage (best first)", &by_out, plan.top)?;
        print_ranking(out, "Average Volatility Ratio (lowest first)", &by_vol, plan.top)?;
        match scatter.correlation {
            Some(r) => writeln!(out, "Volatility/outperformance correlation: {r:.6}")?,
            None => writeln!(out, "Volatility/outperformance correlation: n/a")?,
        }
        if !outcome.skipped.is_empty() {
            writeln!(out)?;
            writeln!(out, "Skipped trials:")?;
            let mut by_ticker: std::collections::BTreeMap<&str, (usize, &str)> = Default::default();
            for s in &outcome.skipped {
                by_ticker.entry(&s.ticker).or_insert((0, &s.reason)).0 += 1;
            }
            for (ticker, (count, reason)) in by_ticker {
                writeln!(out, "  {ticker}: {count} trials skipped (first reason: {reason})")?;
            }
        }
        Ok(())
    })()
    .map_err(io)
}
