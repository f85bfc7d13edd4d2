//! Acceptance checks. Runs without the libtest harness so every criterion prints a
//! PASS/FAIL line even when it passes; exits non-zero if any criterion fails.

mod common;

use std::cell::RefCell;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::{Days, NaiveDate};
use common::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use quantbench::backtest::{
    run_crossover, run_predictive, run_predictive_on, std_dev, BarSource, PredictiveModel,
};
use quantbench::indicators::sma;
use quantbench::market_data::parse_csv;
use quantbench::models::fit_quadratic;
use quantbench::optimizer::{enumerate_pairs, GridBounds};
use quantbench::{BacktestConfig, Bar, DateRange, PriceSeries};

type Outcome = Result<String, String>;
type Check = Box<dyn Fn() -> Outcome>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn within(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, format!("{what}: got {got}, want {want} +/- {tol}"))
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let detail = f()?;
    let took = t.elapsed();
    ensure(took < limit, format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(format!("{detail} in {took:.2?}"))
}

fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn daily(prices: &[f64]) -> PriceSeries {
    let start = date("2010-01-04");
    let bars = prices
        .iter()
        .enumerate()
        .map(|(i, &p)| Bar {
            date: start + Days::new(i as u64),
            open: p,
            high: p,
            low: p,
            close: p,
            adj_close: p,
            volume: 500,
        })
        .collect();
    PriceSeries::new("SYN", bars).unwrap()
}

fn fixture(ticker: &str) -> PriceSeries {
    parse_csv(ticker, &read(fixtures().join(format!("{ticker}.csv")))).unwrap().series
}

fn sma_worked_example() -> Outcome {
    let start = date("2019-01-01");
    let prices: Vec<_> = [20.0, 22.0, 24.0, 25.0, 23.0, 22.0, 27.0]
        .iter()
        .enumerate()
        .map(|(i, &p)| (start + Days::new(i as u64), p))
        .collect();
    let out = sma(&prices, 5).map_err(|e| e.to_string())?;
    let got: Vec<f64> = out.values().iter().map(|v| v.1).collect();
    ensure(got.len() == 3, format!("expected 3 values, got {got:?}"))?;
    for (g, w) in got.iter().zip([22.8, 23.2, 24.2]) {
        within(*g, w, 1e-9, "sma")?;
    }
    Ok(format!("{got:?}"))
}

fn volatility_examples() -> Outcome {
    let a = std_dev(&[1.0, 11.0, 3.0, 20.0, 10.0], 0).map_err(|e| e.to_string())?;
    let b = std_dev(&[1.0, 3.0, 7.0, 6.0, 10.0], 0).map_err(|e| e.to_string())?;
    within(a, 6.72309, 1e-4, "population std of Y1")?;
    within(b, 3.136877, 1e-4, "population std of Y2")?;
    for data in [[1.0, 11.0, 3.0, 20.0, 10.0], [1.0, 3.0, 7.0, 6.0, 10.0]] {
        let mean = data.iter().sum::<f64>() / 5.0;
        let brute = (data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0).sqrt();
        within(std_dev(&data, 1).map_err(|e| e.to_string())?, brute, 1e-9, "sample std")?;
    }
    Ok(format!("sigma = {a:.6}, {b:.6}"))
}

fn quadratic_fit() -> Outcome {
    let pts = [(10.0, 100.0), (12.0, 140.0), (15.0, 160.0), (20.0, 130.0), (23.0, 75.0)];
    let fit = fit_quadratic(&pts).map_err(|e| e.to_string())?;
    for (got, want, name) in [(fit.a, -1.7273, "a"), (fit.b, 54.788, "b"), (fit.c, -272.65, "c")] {
        ensure(((got - want) / want).abs() <= 0.005, format!("{name}: {got} not within 0.5% of {want}"))?;
    }
    let (vx, vy) = fit.vertex.ok_or("no vertex")?;
    within(vx, 15.86, 0.01, "vertex x")?;
    Ok(format!("a={:.4} b={:.3} c={:.2} vertex=({vx:.2}, {vy:.3})", fit.a, fit.b, fit.c))
}

fn grid_cardinality() -> Outcome {
    let n = enumerate_pairs(GridBounds::default()).map_err(|e| e.to_string())?.len();
    ensure(n == 5480, format!("{n} pairs"))?;
    Ok(format!("{n} pairs"))
}

fn golden_backtest() -> Outcome {
    let mut checked = 0;
    for (ticker, short, long) in [("FIXA", "5", "10"), ("FIXC", "20", "50")] {
        let cache = seeded_cache(&[ticker]);
        let out = tempfile::tempdir().unwrap();
        let r = run(&[
            "backtest", "--ticker", ticker, "--start", START, "--end", END, "--strategy", "crossover", "--short",
            short, "--long", long, "--cache-dir", path_str(cache.path()), "--out-dir", path_str(out.path()),
            "--provider-url", OFFLINE,
        ]);
        ensure(r.code == 0, format!("exit {}: {}", r.code, r.stderr))?;
        let golden = fixtures().join(format!("golden/{ticker}_crossover_{short}_{long}"));
        ensure(r.stdout == read(golden.join("report.txt")), format!("{ticker} report differs"))?;
        ensure(
            read(out.path().join("curves.csv")) == read(golden.join("curves.csv")),
            format!("{ticker} curves differ"),
        )?;
        checked += 1;
    }
    Ok(format!("{checked} golden reports byte-identical"))
}

fn monotone_oracles() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 128, failure_persistence: None, ..Config::default() });
    let strategy = (
        (1usize..25).prop_flat_map(|s| (Just(s), s + 1..60)),
        prop::collection::vec(0.001f64..5.0, 60..300),
        any::<bool>(),
    );
    let cases = RefCell::new(0usize);
    runner
        .run(&strategy, |((short, long), steps, rising)| {
            *cases.borrow_mut() += 1;
            let mut p = if rising { 10.0 } else { 10.0 + steps.iter().sum::<f64>() + 1.0 };
            let mut prices = vec![p];
            for s in &steps {
                p += if rising { *s } else { -*s };
                prices.push(p);
            }
            let r = run_crossover(&daily(&prices), short, long).unwrap();
            let n = r.continuous.len() as f64;
            if rising {
                prop_assert!(r.outperformance_pct.abs() <= 1e-9);
                prop_assert!((r.volatility_ratio.unwrap() - 1.0).abs() <= 1e-9);
            } else {
                let first = r.indicative.points[0].1;
                prop_assert!(r.indicative.values().iter().all(|&v| v == first));
                prop_assert!((r.outperformance_pct - (n - 1.0) / n * 100.0).abs() <= 1e-9);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let n = *cases.borrow();
    ensure(n >= 100, format!("only {n} cases"))?;
    Ok(format!("{n} random monotone series"))
}

fn predictive_sanity() -> Outcome {
    let linear: Vec<f64> = (0..120).map(|i| 50.0 + 0.5 * i as f64).collect();
    let series = daily(&linear);
    let first = series.first_date();
    let training = DateRange::new(first, first + Days::new(59)).unwrap();
    let evaluation = DateRange::new(first + Days::new(60), series.last_date()).unwrap();
    let cfg = BacktestConfig::predictive(PredictiveModel::LinearRegression, training, evaluation, 0).unwrap();
    let r = run_predictive(&series, &cfg).map_err(|e| e.to_string())?;
    let conf = r.avg_confidence.ok_or("no confidence on linear series")?;
    within(conf, 1.0, 1e-6, "avg confidence")?;
    ensure(r.indicative.values() == r.continuous.values(), "indicative differs from continuous")?;

    let flat = daily(&[42.0; 120]);
    for model in [PredictiveModel::LinearRegression, PredictiveModel::Knn] {
        let cfg = BacktestConfig::predictive(model, training, evaluation, 0).unwrap();
        let r = run_predictive(&flat, &cfg).map_err(|e| e.to_string())?;
        ensure(r.indicative.values().iter().all(|&v| v == 42.0), format!("{model:?} indicative not flat"))?;
        ensure(r.continuous.values() == r.indicative.values(), format!("{model:?} curves differ"))?;
        ensure(r.outperformance_pct == 0.0, format!("{model:?} outperformance {}", r.outperformance_pct))?;
    }
    Ok(format!("linear confidence {conf:.9}; flat series identical for both models"))
}

/// Counts reads of bars dated on or after the target of the forecast in progress, or
/// after the most recently announced target outside a forecast.
struct Watchdog {
    inner: PriceSeries,
    current: RefCell<Option<NaiveDate>>,
    latest: RefCell<Option<NaiveDate>>,
    reads: RefCell<usize>,
    violations: RefCell<usize>,
    forecasts: RefCell<usize>,
}

impl Watchdog {
    fn new(inner: PriceSeries, first_eval: NaiveDate) -> Self {
        Self {
            inner,
            current: RefCell::new(None),
            latest: RefCell::new(Some(first_eval)),
            reads: RefCell::new(0),
            violations: RefCell::new(0),
            forecasts: RefCell::new(0),
        }
    }
}

impl BarSource for Watchdog {
    fn ticker(&self) -> &str {
        self.inner.ticker()
    }
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn date(&self, i: usize) -> NaiveDate {
        self.inner.bars()[i].date
    }
    fn bar(&self, i: usize) -> Bar {
        let bar = self.inner.bars()[i];
        *self.reads.borrow_mut() += 1;
        let bad = match *self.current.borrow() {
            Some(target) => bar.date >= target,
            None => self.latest.borrow().is_some_and(|t| bar.date > t),
        };
        if bad {
            *self.violations.borrow_mut() += 1;
        }
        bar
    }
    fn begin_forecast(&self, target: NaiveDate) {
        *self.current.borrow_mut() = Some(target);
        *self.forecasts.borrow_mut() += 1;
    }
    fn end_forecast(&self, target: NaiveDate) {
        *self.current.borrow_mut() = None;
        *self.latest.borrow_mut() = Some(target);
    }
}

fn lookahead_freedom() -> Outcome {
    let mut summary = Vec::new();
    for (model, eval_start) in [(PredictiveModel::LinearRegression, "2016-01-04"), (PredictiveModel::Knn, "2019-08-01")] {
        let series = fixture("FIXA");
        let training = DateRange::new(series.first_date(), date(eval_start) - Days::new(1)).unwrap();
        let evaluation = DateRange::new(date(eval_start), series.last_date()).unwrap();
        let cfg = BacktestConfig::predictive(model, training, evaluation, 11).unwrap();
        let watch = Watchdog::new(series, date(eval_start));
        let report = run_predictive_on(&watch, &cfg).map_err(|e| e.to_string())?;
        let (v, f, reads) = (*watch.violations.borrow(), *watch.forecasts.borrow(), *watch.reads.borrow());
        ensure(v == 0, format!("{model:?}: {v} look-ahead reads"))?;
        ensure(f + 1 == report.continuous.len(), format!("{model:?}: {f} forecasts announced"))?;
        ensure(reads == watch.inner.len(), format!("{model:?}: {reads} reads of {} bars", watch.inner.len()))?;
        summary.push(format!("{model:?} {f} forecasts"));
    }
    Ok(format!("0 violations ({})", summary.join(", ")))
}

fn optimize_determinism() -> Outcome {
    let cache = seeded_cache(&["FIXA", "FIXB"]);
    // 10 shorts x 10 longs, all with long > short.
    let grid = ["--short-min", "5", "--short-max", "14", "--long-min", "20", "--long-max", "29"];
    let mut snaps = Vec::new();
    for workers in ["1", "8"] {
        let out = tempfile::tempdir().unwrap();
        let mut args = vec![
            "optimize", "--ticker", "FIXA", "--ticker", "FIXB", "--start", START, "--end", END, "--cache-dir",
            path_str(cache.path()), "--out-dir", path_str(out.path()), "--provider-url", OFFLINE, "--workers", workers,
            "--plot",
        ];
        args.extend(grid);
        let r = run(&args);
        ensure(r.code == 0, format!("exit {}: {}", r.code, r.stderr))?;
        ensure(r.stdout.contains("200 completed"), r.stdout.clone())?;
        snaps.push(snapshot(out.path()));
    }
    ensure(snaps[0] == snaps[1], "outputs differ between 1 and 8 workers")?;
    Ok(format!("{} files identical for 1 and 8 workers", snaps[0].len()))
}

fn full_grid(out: &std::path::Path) -> Outcome {
    let cache = seeded_cache(&["FIXA", "FIXB", "FIXC"]);
    let r = run(&[
        "optimize", "--ticker", "FIXA", "--ticker", "FIXB", "--ticker", "FIXC", "--start", START, "--end", END,
        "--cache-dir", path_str(cache.path()), "--out-dir", path_str(out), "--provider-url", OFFLINE,
    ]);
    ensure(r.code == 0, format!("exit {}: {}", r.code, r.stderr))?;
    let trials = read(out.join("trials.csv")).lines().count() - 1;
    let skipped = read(out.join("skipped.csv")).lines().count() - 1;
    ensure(trials + skipped == 3 * 5480, format!("{trials} trials + {skipped} skipped != 16440"))?;
    Ok(format!("{trials} trials + {skipped} skipped = 16440"))
}

fn scatter_trend(out: &std::path::Path) -> Outcome {
    let summary: serde_json::Value =
        serde_json::from_str(&read(out.join("scatter_summary.json"))).map_err(|e| e.to_string())?;
    let r = summary["pearson_correlation"].as_f64().ok_or("correlation missing")?;
    ensure(r > 0.0, format!("correlation {r}"))?;
    Ok(format!("pearson r = {r:.4} over {} pairs", summary["points"]))
}

fn main() {
    let grid_out = tempfile::tempdir().unwrap();
    let grid_dir = grid_out.path().to_path_buf();
    let criteria: Vec<(&str, Check)> = vec![
        ("sma worked example", Box::new(sma_worked_example)),
        ("volatility examples", Box::new(volatility_examples)),
        ("quadratic donut fit", Box::new(quadratic_fit)),
        ("grid cardinality", Box::new(grid_cardinality)),
        ("golden crossover reports", Box::new(|| timed(Duration::from_secs(10), golden_backtest))),
        ("monotone-series oracles", Box::new(|| timed(Duration::from_secs(30), monotone_oracles))),
        ("predictive-engine sanity", Box::new(predictive_sanity)),
        ("look-ahead freedom", Box::new(lookahead_freedom)),
        ("determinism under parallelism", Box::new(optimize_determinism)),
        ("desk-scale grid", Box::new(move || timed(Duration::from_secs(120), || full_grid(&grid_dir)))),
        ("scatter trend", Box::new({
            let dir = grid_out.path().to_path_buf();
            move || scatter_trend(&dir)
        })),
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    let _ = panic::take_hook();
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
