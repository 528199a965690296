//! Rolling and exponential indicators over per-ticker price columns.
//!
//! Every function returns one value per input element; `None` marks the warm-up
//! prefix (or, for forward returns, the suffix) where the window is not filled.

mod table;

pub use table::{
    build_analytics, AnalyticsRow, AnalyticsTable, IndicatorParams, SignalRow, TickerFrame,
    ANALYTICS_HEADER,
};

use crate::error::{Error, Result};
use crate::types::PriceBar;

/// Simple moving average over `window` elements.
pub fn sma(values: &[f64], window: usize) -> Result<Vec<Option<f64>>> {
    if window == 0 {
        return Err(Error::arg("sma window must be >= 1"));
    }
    let mut out = vec![None; values.len()];
    if values.len() < window {
        return Ok(out);
    }
    let w = window as f64;
    let mut sum: f64 = values[..window].iter().sum();
    out[window - 1] = Some(sum / w);
    for i in window..values.len() {
        // Re-sum from scratch once per window so rounding drift stays bounded.
        if (i - window + 1).is_multiple_of(window) {
            sum = values[i + 1 - window..=i].iter().sum();
        } else {
            sum += values[i] - values[i - window];
        }
        out[i] = Some(sum / w);
    }
    Ok(out)
}

/// Exponential moving average with α = 2 / (span + 1), seeded by the SMA of the
/// first `span` values at index `span - 1`.
pub fn ema(values: &[f64], span: usize) -> Result<Vec<Option<f64>>> {
    if span == 0 {
        return Err(Error::arg("ema span must be >= 1"));
    }
    let mut out = vec![None; values.len()];
    if values.len() < span {
        return Ok(out);
    }
    let alpha = 2.0 / (span as f64 + 1.0);
    let mut prev = values[..span].iter().sum::<f64>() / span as f64;
    out[span - 1] = Some(prev);
    for i in span..values.len() {
        prev = alpha * values[i] + (1.0 - alpha) * prev;
        out[i] = Some(prev);
    }
    Ok(out)
}

/// `closes[i] / closes[i - lookback] - 1`.
pub fn momentum(closes: &[f64], lookback: usize) -> Result<Vec<Option<f64>>> {
    if lookback == 0 {
        return Err(Error::arg("momentum lookback must be >= 1"));
    }
    Ok((0..closes.len())
        .map(|i| (i >= lookback).then(|| closes[i] / closes[i - lookback] - 1.0))
        .collect())
}

/// `closes[i + horizon] / closes[i] - 1`. Realized future return; evaluation only.
pub fn forward_return(closes: &[f64], horizon: usize) -> Result<Vec<Option<f64>>> {
    if horizon == 0 {
        return Err(Error::arg("forward horizon must be >= 1"));
    }
    Ok((0..closes.len())
        .map(|i| closes.get(i + horizon).map(|f| f / closes[i] - 1.0))
        .collect())
}

pub fn true_range(high: f64, low: f64, prev_close: f64) -> Result<f64> {
    if high < low {
        return Err(Error::arg(format!("high {high} below low {low}")));
    }
    Ok(tr(high, low, prev_close))
}

#[inline]
fn tr(high: f64, low: f64, prev_close: f64) -> f64 {
    (high - low)
        .max((high - prev_close).abs())
        .max((low - prev_close).abs())
}

/// True range per bar; the first bar has no previous close and uses `high - low`.
pub fn true_range_series(bars: &[PriceBar]) -> Vec<f64> {
    bars.iter()
        .enumerate()
        .map(|(i, b)| match i {
            0 => b.high - b.low,
            _ => tr(b.high, b.low, bars[i - 1].close),
        })
        .collect()
}

/// Average true range: [`ema`] of the true-range sequence with `span = period`.
pub fn atr(bars: &[PriceBar], period: usize) -> Result<Vec<Option<f64>>> {
    if period == 0 {
        return Err(Error::arg("atr period must be >= 1"));
    }
    if bars.len() < 2 {
        return Ok(vec![None; bars.len()]);
    }
    ema(&true_range_series(bars), period)
}
