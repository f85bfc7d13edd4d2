//! Resolution of flags, the optional JSON config file and defaults into one run config.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use quantbench::market_data::{parse_date, DateRange, DEFAULT_PROVIDER_URL};
use quantbench::optimizer::{GridBounds, DEFAULT_RATIO_WIDTH};
use serde::Deserialize;

use crate::args::{BacktestArgs, CommonArgs, FetchArgs, Format, KnnScalingArg, OptimizeArgs, StrategyArg};
use crate::CliError;

pub const DEFAULT_CACHE_DIR: &str = ".quantbench-cache";
pub const DEFAULT_OUT_DIR: &str = "quantbench-out";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct FileConfig {
    pub ticker: Option<String>,
    pub tickers: Option<Vec<String>>,
    pub start: Option<String>,
    pub end: Option<String>,
    pub provider_url: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub plot: Option<bool>,
    pub strategy: Option<StrategyArg>,
    pub short: Option<usize>,
    pub long: Option<usize>,
    pub train_start: Option<String>,
    pub knn_scaling: Option<KnnScalingArg>,
    pub csv: Option<PathBuf>,
    pub tickers_file: Option<PathBuf>,
    pub short_min: Option<usize>,
    pub short_max: Option<usize>,
    pub long_min: Option<usize>,
    pub long_max: Option<usize>,
    pub workers: Option<usize>,
    pub top: Option<usize>,
    pub ratio_width: Option<f64>,
}

fn load_file(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn file_date(value: &Option<String>, key: &str) -> Result<Option<NaiveDate>, CliError> {
    value
        .as_deref()
        .map(|s| parse_date(s).ok_or_else(|| CliError::Usage(format!("config {key}: invalid date {s:?}"))))
        .transpose()
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Shared {
    pub tickers: Vec<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub provider_url: String,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
    pub out_dir_given: bool,
    pub seed: u64,
    pub format: Option<Format>,
    pub plot: bool,
}

impl Shared {
    fn resolve(args: &CommonArgs, file: &FileConfig) -> Result<Self, CliError> {
        let tickers = if !args.tickers.is_empty() {
            args.tickers.clone()
        } else if let Some(list) = &file.tickers {
            list.clone()
        } else {
            file.ticker.iter().cloned().collect()
        };
        let out_dir = args.out_dir.clone().or_else(|| file.out_dir.clone());
        Ok(Self {
            tickers: tickers.into_iter().map(|t| t.trim().to_string()).collect(),
            start: args.start.or(file_date(&file.start, "start")?),
            end: args.end.or(file_date(&file.end, "end")?),
            provider_url: args
                .provider_url
                .clone()
                .or_else(|| file.provider_url.clone())
                .unwrap_or_else(|| DEFAULT_PROVIDER_URL.to_string()),
            cache_dir: args
                .cache_dir
                .clone()
                .or_else(|| file.cache_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
            out_dir_given: out_dir.is_some(),
            out_dir: out_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            seed: args.seed.or(file.seed).unwrap_or(0),
            format: args.format.or(file.format),
            plot: args.plot || file.plot.unwrap_or(false),
        })
    }

    pub fn range(&self) -> Result<DateRange, CliError> {
        let start = self.start.ok_or_else(|| CliError::Usage("--start is required".into()))?;
        let end = self.end.ok_or_else(|| CliError::Usage("--end is required".into()))?;
        DateRange::new(start, end).map_err(|_| CliError::Usage(format!("--start {start} is after --end {end}")))
    }

    pub fn writes(&self, format: Format) -> bool {
        self.format.is_none_or(|f| f == format)
    }
}

#[derive(Debug)]
pub struct FetchConfig {
    pub shared: Shared,
    pub range: DateRange,
}

pub fn fetch(args: &FetchArgs) -> Result<FetchConfig, CliError> {
    let file = load_file(args.common.config.as_deref())?;
    let shared = Shared::resolve(&args.common, &file)?;
    if shared.tickers.is_empty() {
        return Err(CliError::Usage("at least one --ticker is required".into()));
    }
    let range = shared.range()?;
    Ok(FetchConfig { shared, range })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyPlan {
    Crossover { short: usize, long: usize },
    Predictive { model: StrategyArg, training: DateRange, scaling: KnnScalingArg },
}

#[derive(Debug)]
pub struct BacktestPlan {
    pub shared: Shared,
    pub ticker: String,
    pub evaluation: DateRange,
    /// Dates the price data must cover.
    pub data_range: DateRange,
    pub strategy: StrategyPlan,
    pub csv: Option<PathBuf>,
}

pub fn backtest(args: &BacktestArgs) -> Result<BacktestPlan, CliError> {
    let file = load_file(args.common.config.as_deref())?;
    let shared = Shared::resolve(&args.common, &file)?;
    let csv = args.csv.clone().or_else(|| file.csv.clone());
    let ticker = match (shared.tickers.as_slice(), &csv) {
        ([t], _) => t.clone(),
        ([], Some(path)) => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "CSV".into()),
        ([], None) => return Err(CliError::Usage("--ticker is required".into())),
        _ => return Err(CliError::Usage("backtest takes exactly one --ticker".into())),
    };
    let evaluation = shared.range()?;
    let strategy = args
        .strategy
        .or(file.strategy)
        .ok_or_else(|| CliError::Usage("--strategy is required (crossover, linreg or knn)".into()))?;
    let plan = match strategy {
        StrategyArg::Crossover => {
            let short = args.short.or(file.short);
            let long = args.long.or(file.long);
            let (Some(short), Some(long)) = (short, long) else {
                return Err(CliError::Usage("crossover needs --short and --long".into()));
            };
            if short == 0 || short >= long {
                return Err(CliError::Usage(format!(
                    "--short must be at least 1 and less than --long (got short={short}, long={long})"
                )));
            }
            StrategyPlan::Crossover { short, long }
        }
        model => {
            let train_start = match args.train_start {
                Some(d) => d,
                None => file_date(&file.train_start, "train_start")?
                    .ok_or_else(|| CliError::Usage(format!("{} needs --train-start", strategy_name(model))))?,
            };
            let last_training = evaluation.start().pred_opt().unwrap_or(evaluation.start());
            if train_start > last_training {
                return Err(CliError::Usage(format!(
                    "--train-start {train_start} must be before --start {}",
                    evaluation.start()
                )));
            }
            let training = DateRange::new(train_start, last_training)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let scaling = args.knn_scaling.or(file.knn_scaling).unwrap_or(KnnScalingArg::Minmax);
            StrategyPlan::Predictive { model, training, scaling }
        }
    };
    let data_range = match plan {
        StrategyPlan::Crossover { .. } => evaluation,
        StrategyPlan::Predictive { training, .. } => DateRange::new(training.start(), evaluation.end())
            .map_err(|e| CliError::Usage(e.to_string()))?,
    };
    Ok(BacktestPlan { shared, ticker, evaluation, data_range, strategy: plan, csv })
}

fn strategy_name(s: StrategyArg) -> &'static str {
    match s {
        StrategyArg::Crossover => "crossover",
        StrategyArg::Linreg => "linreg",
        StrategyArg::Knn => "knn",
    }
}

#[derive(Debug)]
pub struct OptimizePlan {
    pub shared: Shared,
    pub range: DateRange,
    pub bounds: GridBounds,
    pub workers: usize,
    pub top: usize,
    pub ratio_width: f64,
}

pub fn optimize(args: &OptimizeArgs) -> Result<OptimizePlan, CliError> {
    let file = load_file(args.common.config.as_deref())?;
    let mut shared = Shared::resolve(&args.common, &file)?;
    if let Some(path) = args.tickers_file.clone().or_else(|| file.tickers_file.clone()) {
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read tickers file {}: {e}", path.display())))?;
        shared.tickers.extend(parse_tickers(&text));
    }
    let mut seen = std::collections::HashSet::new();
    shared.tickers.retain(|t| !t.is_empty() && seen.insert(t.clone()));
    if shared.tickers.is_empty() {
        return Err(CliError::Usage("no tickers given (use --ticker or a non-empty --tickers-file)".into()));
    }
    let range = shared.range()?;
    let d = GridBounds::default();
    let bounds = GridBounds {
        short_min: args.short_min.or(file.short_min).unwrap_or(d.short_min),
        short_max: args.short_max.or(file.short_max).unwrap_or(d.short_max),
        long_min: args.long_min.or(file.long_min).unwrap_or(d.long_min),
        long_max: args.long_max.or(file.long_max).unwrap_or(d.long_max),
    };
    let workers = match args.workers.or(file.workers) {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let ratio_width = args.ratio_width.or(file.ratio_width).unwrap_or(DEFAULT_RATIO_WIDTH);
    if !(ratio_width.is_finite() && ratio_width > 0.0) {
        return Err(CliError::Usage(format!("--ratio-width must be positive, got {ratio_width}")));
    }
    Ok(OptimizePlan {
        shared,
        range,
        bounds,
        workers,
        top: args.top.or(file.top).unwrap_or(5),
        ratio_width,
    })
}

pub fn parse_tickers(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .flat_map(|l| l.split([',', ' ', '\t']).filter(|t| !t.is_empty()).map(str::to_string).collect::<Vec<_>>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticker_file_parsing() {
        let text = "# dow\nAAPL\n\n MSFT, GE # comment\nIBM\tKO\n";
        assert_eq!(parse_tickers(text), ["AAPL", "MSFT", "GE", "IBM", "KO"]);
        assert!(parse_tickers("# only comments\n\n").is_empty());
    }
}
