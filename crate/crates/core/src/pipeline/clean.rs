use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::CleaningReport;
use crate::error::{Error, Result};
use crate::types::{PriceBar, PriceSeries, RawSeries};

pub const DEFAULT_MIN_HISTORY_DAYS: usize = 756;
pub const DEFAULT_MAX_ABS_DAILY_RETURN: f64 = 0.80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanOptions {
    pub min_history_days: usize,
    pub max_abs_daily_return: f64,
}

impl Default for CleanOptions {
    fn default() -> Self {
        Self {
            min_history_days: DEFAULT_MIN_HISTORY_DAYS,
            max_abs_daily_return: DEFAULT_MAX_ABS_DAILY_RETURN,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FillStats {
    pub filled: usize,
    pub dropped: usize,
}

/// Carries each field's last observed value forward within the series.
///
/// Rows that still lack any price afterwards (a leading gap) are dropped. A
/// missing volume with nothing to carry becomes zero.
pub fn forward_fill(series: &RawSeries) -> (PriceSeries, FillStats) {
    let mut last: [Option<f64>; 5] = [None; 5];
    let mut stats = FillStats::default();
    let mut bars = Vec::with_capacity(series.rows.len());

    for row in &series.rows {
        let fields = [row.open, row.high, row.low, row.close, row.volume];
        let mut filled_any = false;
        let mut out = [None; 5];
        for (i, f) in fields.iter().enumerate() {
            match f {
                Some(v) => {
                    last[i] = Some(*v);
                    out[i] = Some(*v);
                }
                None => {
                    out[i] = last[i];
                    filled_any |= last[i].is_some();
                }
            }
        }
        match (out[0], out[1], out[2], out[3]) {
            (Some(open), Some(high), Some(low), Some(close)) => {
                if filled_any {
                    stats.filled += 1;
                }
                bars.push(PriceBar {
                    date: row.date,
                    open,
                    high,
                    low,
                    close,
                    volume: out[4].unwrap_or(0.0),
                });
            }
            _ => stats.dropped += 1,
        }
    }
    (PriceSeries::new(series.ticker.clone(), bars), stats)
}

/// Removes bars violating positivity or the OHLC ordering.
pub fn drop_inconsistent(series: PriceSeries) -> (PriceSeries, usize) {
    let before = series.bars.len();
    let bars: Vec<PriceBar> = series
        .bars
        .into_iter()
        .filter(|b| b.is_consistent())
        .collect();
    let removed = before - bars.len();
    (PriceSeries::new(series.ticker, bars), removed)
}

/// Keeps series with at least `min_days` bars. Returns (kept, dropped tickers, dropped rows).
pub fn filter_min_history(
    universe: Vec<PriceSeries>,
    min_days: usize,
) -> Result<(Vec<PriceSeries>, usize, usize)> {
    if min_days == 0 {
        return Err(Error::arg("min_days must be >= 1"));
    }
    let mut dropped_tickers = 0;
    let mut dropped_rows = 0;
    let kept = universe
        .into_iter()
        .filter(|s| {
            let keep = s.len() >= min_days;
            if !keep {
                dropped_tickers += 1;
                dropped_rows += s.len();
            }
            keep
        })
        .collect();
    Ok((kept, dropped_tickers, dropped_rows))
}

/// One non-cascading pass: returns are computed on the input sequence and every bar
/// whose |close / prev_close - 1| exceeds the threshold is dropped.
pub fn remove_outlier_returns(
    series: PriceSeries,
    max_abs_daily_return: f64,
) -> (PriceSeries, usize) {
    let n = series.bars.len();
    if n < 2 {
        return (series, 0);
    }
    let keep: Vec<bool> = std::iter::once(true)
        .chain(
            series
                .bars
                .windows(2)
                .map(|w| (w[1].close / w[0].close - 1.0).abs() <= max_abs_daily_return),
        )
        .collect();
    let bars: Vec<PriceBar> = series
        .bars
        .into_iter()
        .zip(keep)
        .filter_map(|(b, k)| k.then_some(b))
        .collect();
    let removed = n - bars.len();
    (PriceSeries::new(series.ticker, bars), removed)
}

/// Repeats the single pass until no return exceeds the threshold.
pub fn remove_outliers_to_fixpoint(
    mut series: PriceSeries,
    max_abs_daily_return: f64,
) -> (PriceSeries, usize) {
    let mut total = 0;
    loop {
        let (next, removed) = remove_outlier_returns(series, max_abs_daily_return);
        series = next;
        total += removed;
        if removed == 0 {
            return (series, total);
        }
    }
}

/// Fill → consistency check → history floor → outliers → history floor again.
///
/// The second history check keeps the pipeline idempotent when outlier removal
/// pushes a series under the floor.
pub fn clean_series(raw: &RawSeries, opts: &CleanOptions) -> (Option<PriceSeries>, CleaningReport) {
    let mut report = CleaningReport {
        input_rows: raw.rows.len(),
        ..CleaningReport::default()
    };
    let (filled, stats) = forward_fill(raw);
    report.rows_forward_filled = stats.filled;
    report.rows_dropped_missing = stats.dropped;

    let (valid, invalid) = drop_inconsistent(filled);
    report.rows_dropped_invalid = invalid;

    let too_short = |s: &PriceSeries| s.len() < opts.min_history_days.max(1);
    if too_short(&valid) {
        report.tickers_dropped_short_history = 1;
        report.rows_dropped_short_history = valid.len();
        return (None, report);
    }

    let (cleaned, outliers) = remove_outliers_to_fixpoint(valid, opts.max_abs_daily_return);
    report.rows_dropped_outlier = outliers;
    if too_short(&cleaned) {
        report.tickers_dropped_short_history = 1;
        report.rows_dropped_short_history = cleaned.len();
        return (None, report);
    }
    report.output_rows = cleaned.len();
    (Some(cleaned), report)
}

/// Cleans every ticker independently (in parallel); output sorted by ticker.
pub fn clean_universe(
    raw: &[RawSeries],
    opts: &CleanOptions,
) -> (Vec<PriceSeries>, CleaningReport) {
    let parts: Vec<(Option<PriceSeries>, CleaningReport)> =
        raw.par_iter().map(|s| clean_series(s, opts)).collect();
    let report = parts.iter().map(|(_, r)| *r).sum();
    let mut series: Vec<PriceSeries> = parts.into_iter().filter_map(|(s, _)| s).collect();
    series.sort_by(|a, b| a.ticker.cmp(&b.ticker));
    (series, report)
}
