#![allow(dead_code)]

pub mod oracles;

use trendgate::backtest::{run_backtest, BacktestConfig, BacktestResult};
use trendgate::indicators::{build_analytics, AnalyticsTable, IndicatorParams};
use trendgate::pipeline::{clean_loaded, read_prices, CleanOptions, CleaningReport, LoadOptions};
use trendgate::strategy::{SentimentBook, StrategyKind};
use trendgate::synth::{generate, write_raw_csv, SynthConfig, SynthData};
use trendgate::PriceSeries;

pub struct Universe {
    pub data: SynthData,
    pub clean: Vec<PriceSeries>,
    pub report: CleaningReport,
    pub table: AnalyticsTable,
}

/// Synthetic data written to CSV, loaded back, cleaned and turned into indicators.
pub fn universe(cfg: &SynthConfig) -> Universe {
    let data = generate(cfg).expect("synth");
    let mut csv = Vec::new();
    write_raw_csv(&data.raw, &mut csv).expect("write raw");
    let loaded = read_prices(csv.as_slice(), &LoadOptions::default()).expect("load");
    let (clean, report) = clean_loaded(&loaded, &CleanOptions::default());
    let table = build_analytics(&clean, &IndicatorParams::default()).expect("analytics");
    Universe {
        data,
        clean,
        report,
        table,
    }
}

pub fn small_config(seed: u64, tickers: usize) -> SynthConfig {
    SynthConfig {
        seed,
        tickers,
        days: 1000,
        ..SynthConfig::default()
    }
}

pub fn run(
    table: &AnalyticsTable,
    kind: StrategyKind,
    book: &SentimentBook,
    cfg: &BacktestConfig,
) -> BacktestResult {
    run_backtest(table, kind, book, cfg).expect("backtest")
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn opt_close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => rel_close(x, y, tol),
        _ => false,
    }
}
