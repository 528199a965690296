//! Trend-following momentum backtester with a sentiment gate.
//!
//! The crate covers the full research path: raw OHLCV cleaning
//! ([`pipeline`]), indicator computation ([`indicators`]), signal rules
//! ([`strategy`]), day-by-day portfolio simulation ([`backtest`]) and
//! evaluation ([`analytics`]). [`synth`] generates seeded test universes.

pub mod analytics;
pub mod backtest;
mod error;
pub mod indicators;
pub mod pipeline;
pub mod strategy;
pub mod synth;
mod types;

pub use error::{Error, Result};
pub use types::{Date, PriceBar, PriceSeries, RawBar, RawSeries};

pub use analytics::{MetricConventions, MetricsSummary};
pub use backtest::{run_backtest, BacktestConfig, BacktestResult, Trade};
pub use indicators::{build_analytics, AnalyticsTable, IndicatorParams, TickerFrame};
pub use pipeline::{CleanOptions, CleaningReport, LoadOptions};
pub use strategy::{SentimentBook, SentimentLabel, SentimentRecord, StrategyKind, StrategyParams};
