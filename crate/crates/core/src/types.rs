//! Price data shared by every stage of the pipeline.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub type Date = NaiveDate;

/// One cleaned daily OHLCV bar. The ticker lives on the owning [`PriceSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceBar {
    pub date: Date,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl PriceBar {
    /// Strictly positive prices with `low <= min(open, close)` and `high >= max(open, close)`.
    pub fn is_consistent(&self) -> bool {
        let positive = [self.open, self.high, self.low, self.close]
            .iter()
            .all(|p| p.is_finite() && *p > 0.0);
        positive
            && self.low <= self.open.min(self.close)
            && self.high >= self.open.max(self.close)
            && self.volume.is_finite()
            && self.volume >= 0.0
    }
}

/// Date-ascending bars for a single ticker, no duplicate dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub ticker: String,
    pub bars: Vec<PriceBar>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, bars: Vec<PriceBar>) -> Self {
        Self {
            ticker: ticker.into(),
            bars,
        }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn dates(&self) -> Vec<Date> {
        self.bars.iter().map(|b| b.date).collect()
    }
}

/// A bar as read from disk, before missing fields have been filled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawBar {
    pub date: Date,
    pub open: Option<f64>,
    pub high: Option<f64>,
    pub low: Option<f64>,
    pub close: Option<f64>,
    pub volume: Option<f64>,
}

impl RawBar {
    pub fn complete(bar: &PriceBar) -> Self {
        Self {
            date: bar.date,
            open: Some(bar.open),
            high: Some(bar.high),
            low: Some(bar.low),
            close: Some(bar.close),
            volume: Some(bar.volume),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub ticker: String,
    pub rows: Vec<RawBar>,
}

impl From<&PriceSeries> for RawSeries {
    fn from(s: &PriceSeries) -> Self {
        RawSeries {
            ticker: s.ticker.clone(),
            rows: s.bars.iter().map(RawBar::complete).collect(),
        }
    }
}
