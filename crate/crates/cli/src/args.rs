use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use quantbench::market_data::parse_date;

#[derive(Debug, Parser)]
#[command(name = "quantbench", version, about = "Backtest SMA crossover and walk-forward forecasting strategies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download histories into the cache and print row counts.
    Fetch(FetchArgs),
    /// Run one strategy on one ticker and write its report.
    Backtest(BacktestArgs),
    /// Grid-search SMA crossover periods over a set of tickers.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Crossover,
    Linreg,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnnScalingArg {
    Minmax,
    StandardizeOnly,
}

fn date_arg(text: &str) -> Result<NaiveDate, String> {
    parse_date(text).ok_or_else(|| format!("invalid date {text:?}, expected YYYY-MM-DD"))
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Ticker symbol; repeat for several.
    #[arg(long = "ticker")]
    pub tickers: Vec<String>,
    /// First date of the evaluation window.
    #[arg(long, value_parser = date_arg)]
    pub start: Option<NaiveDate>,
    /// Last date of the evaluation window (inclusive).
    #[arg(long, value_parser = date_arg)]
    pub end: Option<NaiveDate>,
    /// Provider URL template with {ticker}, {start} and {end} placeholders.
    #[arg(long)]
    pub provider_url: Option<String>,
    #[arg(long, env = "QUANTBENCH_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict machine-readable output to one format (both are written by default).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write SVG charts.
    #[arg(long)]
    pub plot: bool,
    /// JSON file with defaults for any of these flags; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FetchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, visible_alias = "model")]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub short: Option<usize>,
    #[arg(long)]
    pub long: Option<usize>,
    /// First training date for linreg/knn; training ends the day before --start.
    #[arg(long, value_parser = date_arg)]
    pub train_start: Option<NaiveDate>,
    #[arg(long, value_enum)]
    pub knn_scaling: Option<KnnScalingArg>,
    /// Read prices from this CSV file instead of the cache/provider.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One ticker per line; blank lines and `#` comments are ignored.
    #[arg(long)]
    pub tickers_file: Option<PathBuf>,
    #[arg(long)]
    pub short_min: Option<usize>,
    #[arg(long)]
    pub short_max: Option<usize>,
    #[arg(long)]
    pub long_min: Option<usize>,
    #[arg(long)]
    pub long_max: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Rows shown from each end of the rankings.
    #[arg(long)]
    pub top: Option<usize>,
    /// Width of the long/short ratio buckets.
    #[arg(long)]
    pub ratio_width: Option<f64>,
}
