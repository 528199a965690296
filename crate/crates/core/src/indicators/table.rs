use std::io::{Read, Write};

use chrono::Datelike;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{atr, ema, forward_return, momentum, sma};
use crate::error::{Error, Result};
use crate::types::{Date, PriceSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndicatorParams {
    pub ma_fast: usize,
    pub ma_slow: usize,
    pub ema_fast: usize,
    pub ema_slow: usize,
    pub momentum_lookback: usize,
    pub atr_period: usize,
    pub forward_horizon: usize,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        Self {
            ma_fast: 50,
            ma_slow: 200,
            ema_fast: 50,
            ema_slow: 200,
            momentum_lookback: 63,
            atr_period: 14,
            forward_horizon: 21,
        }
    }
}

/// Columnar price and indicator data for one ticker, dates strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TickerFrame {
    pub ticker: String,
    pub dates: Vec<Date>,
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
    pub volume: Vec<f64>,
    pub ma50: Vec<Option<f64>>,
    pub ma200: Vec<Option<f64>>,
    pub ema50: Vec<Option<f64>>,
    pub ema200: Vec<Option<f64>>,
    pub momentum63: Vec<Option<f64>>,
    pub atr14: Vec<Option<f64>>,
    pub fwd_return_21: Vec<Option<f64>>,
}

impl TickerFrame {
    pub fn compute(series: &PriceSeries, p: &IndicatorParams) -> Result<Self> {
        let closes = series.closes();
        Ok(Self {
            ticker: series.ticker.clone(),
            dates: series.dates(),
            open: series.bars.iter().map(|b| b.open).collect(),
            high: series.bars.iter().map(|b| b.high).collect(),
            low: series.bars.iter().map(|b| b.low).collect(),
            volume: series.bars.iter().map(|b| b.volume).collect(),
            ma50: sma(&closes, p.ma_fast)?,
            ma200: sma(&closes, p.ma_slow)?,
            ema50: ema(&closes, p.ema_fast)?,
            ema200: ema(&closes, p.ema_slow)?,
            momentum63: momentum(&closes, p.momentum_lookback)?,
            atr14: atr(&series.bars, p.atr_period)?,
            fwd_return_21: forward_return(&closes, p.forward_horizon)?,
            close: closes,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Index of the row dated exactly `date`.
    pub fn index_of(&self, date: Date) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Index of the latest row dated at or before `as_of`.
    pub fn as_of_index(&self, as_of: Date) -> Option<usize> {
        self.dates.partition_point(|d| *d <= as_of).checked_sub(1)
    }

    pub fn row(&self, i: usize) -> AnalyticsRow<'_> {
        AnalyticsRow {
            ticker: &self.ticker,
            date: self.dates[i],
            open: self.open[i],
            high: self.high[i],
            low: self.low[i],
            close: self.close[i],
            volume: self.volume[i],
            ma50: self.ma50[i],
            ma200: self.ma200[i],
            ema50: self.ema50[i],
            ema200: self.ema200[i],
            momentum63: self.momentum63[i],
            atr14: self.atr14[i],
            fwd_return_21: self.fwd_return_21[i],
        }
    }

    fn select(&self, keep: impl Fn(usize) -> bool) -> Self {
        fn pick<T: Copy>(v: &[T], idx: &[usize]) -> Vec<T> {
            idx.iter().map(|&i| v[i]).collect()
        }
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        Self {
            ticker: self.ticker.clone(),
            dates: pick(&self.dates, &idx),
            open: pick(&self.open, &idx),
            high: pick(&self.high, &idx),
            low: pick(&self.low, &idx),
            close: pick(&self.close, &idx),
            volume: pick(&self.volume, &idx),
            ma50: pick(&self.ma50, &idx),
            ma200: pick(&self.ma200, &idx),
            ema50: pick(&self.ema50, &idx),
            ema200: pick(&self.ema200, &idx),
            momentum63: pick(&self.momentum63, &idx),
            atr14: pick(&self.atr14, &idx),
            fwd_return_21: pick(&self.fwd_return_21, &idx),
        }
    }

    fn push(&mut self, r: &OwnedRow) {
        self.dates.push(r.date);
        self.open.push(r.open);
        self.high.push(r.high);
        self.low.push(r.low);
        self.close.push(r.close);
        self.volume.push(r.volume);
        self.ma50.push(r.ma50);
        self.ma200.push(r.ma200);
        self.ema50.push(r.ema50);
        self.ema200.push(r.ema200);
        self.momentum63.push(r.momentum63);
        self.atr14.push(r.atr14);
        self.fwd_return_21.push(r.fwd_return_21);
    }
}

/// A price bar joined with its precomputed indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticsRow<'a> {
    pub ticker: &'a str,
    pub date: Date,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
    pub ma50: Option<f64>,
    pub ma200: Option<f64>,
    pub ema50: Option<f64>,
    pub ema200: Option<f64>,
    pub momentum63: Option<f64>,
    pub atr14: Option<f64>,
    pub fwd_return_21: Option<f64>,
}

impl<'a> AnalyticsRow<'a> {
    /// The view handed to signal rules: the forward return is not reachable from it.
    pub fn signal_view(&self) -> SignalRow<'a> {
        SignalRow {
            ticker: self.ticker,
            date: self.date,
            open: self.open,
            close: self.close,
            ma50: self.ma50,
            ma200: self.ma200,
            ema50: self.ema50,
            ema200: self.ema200,
            momentum63: self.momentum63,
            atr14: self.atr14,
        }
    }
}

/// Point-in-time fields a trading rule may read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalRow<'a> {
    pub ticker: &'a str,
    pub date: Date,
    pub open: f64,
    pub close: f64,
    pub ma50: Option<f64>,
    pub ma200: Option<f64>,
    pub ema50: Option<f64>,
    pub ema200: Option<f64>,
    pub momentum63: Option<f64>,
    pub atr14: Option<f64>,
}

/// All tickers' frames, sorted by ticker.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalyticsTable {
    frames: Vec<TickerFrame>,
}

pub const ANALYTICS_HEADER: [&str; 14] = [
    "ticker",
    "date",
    "open",
    "high",
    "low",
    "close",
    "volume",
    "ma50",
    "ma200",
    "ema50",
    "ema200",
    "momentum63",
    "atr14",
    "fwd_return_21",
];

#[derive(Debug, Clone, Copy)]
struct OwnedRow {
    date: Date,
    open: f64,
    high: f64,
    low: f64,
    close: f64,
    volume: f64,
    ma50: Option<f64>,
    ma200: Option<f64>,
    ema50: Option<f64>,
    ema200: Option<f64>,
    momentum63: Option<f64>,
    atr14: Option<f64>,
    fwd_return_21: Option<f64>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl AnalyticsTable {
    pub fn from_frames(mut frames: Vec<TickerFrame>) -> Result<Self> {
        frames.sort_by(|a, b| a.ticker.cmp(&b.ticker));
        for w in frames.windows(2) {
            if w[0].ticker == w[1].ticker {
                return Err(Error::arg(format!("duplicate ticker {}", w[0].ticker)));
            }
        }
        for f in &frames {
            if f.dates.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::arg(format!(
                    "{}: dates not strictly increasing",
                    f.ticker
                )));
            }
            let n = f.dates.len();
            let lens = [
                f.open.len(),
                f.high.len(),
                f.low.len(),
                f.close.len(),
                f.volume.len(),
                f.ma50.len(),
                f.ma200.len(),
                f.ema50.len(),
                f.ema200.len(),
                f.momentum63.len(),
                f.atr14.len(),
                f.fwd_return_21.len(),
            ];
            if lens.iter().any(|&l| l != n) {
                return Err(Error::arg(format!("{}: column lengths differ", f.ticker)));
            }
        }
        frames.retain(|f| !f.is_empty());
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[TickerFrame] {
        &self.frames
    }

    pub fn frame(&self, ticker: &str) -> Option<&TickerFrame> {
        self.frame_index(ticker).map(|i| &self.frames[i])
    }

    pub fn frame_index(&self, ticker: &str) -> Option<usize> {
        self.frames
            .binary_search_by(|f| f.ticker.as_str().cmp(ticker))
            .ok()
    }

    pub fn row_count(&self) -> usize {
        self.frames.iter().map(TickerFrame::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// All rows ordered by (ticker, date).
    pub fn rows(&self) -> impl Iterator<Item = AnalyticsRow<'_>> {
        self.frames
            .iter()
            .flat_map(|f| (0..f.len()).map(move |i| f.row(i)))
    }

    /// Sorted union of every ticker's dates.
    pub fn calendar(&self) -> Vec<Date> {
        let mut dates: Vec<Date> = self
            .frames
            .iter()
            .flat_map(|f| f.dates.iter().copied())
            .collect();
        dates.sort_unstable();
        dates.dedup();
        dates
    }

    /// Drops every row dated after `date`.
    pub fn truncate_after(&self, date: Date) -> Self {
        let frames = self
            .frames
            .iter()
            .map(|f| f.select(|i| f.dates[i] <= date))
            .filter(|f| !f.is_empty())
            .collect();
        Self { frames }
    }

    /// Keeps rows dated within `start..=end`; indicator values are not recomputed.
    pub fn between(&self, start: Date, end: Date) -> Self {
        let frames = self
            .frames
            .iter()
            .map(|f| f.select(|i| (start..=end).contains(&f.dates[i])))
            .filter(|f| !f.is_empty())
            .collect();
        Self { frames }
    }

    /// Keeps each ticker's last row of every ISO week.
    pub fn week_end_rows(&self) -> Self {
        let frames = self
            .frames
            .iter()
            .map(|f| {
                let week = |i: usize| {
                    let w = f.dates[i].iso_week();
                    (w.year(), w.week())
                };
                f.select(|i| i + 1 == f.len() || week(i) != week(i + 1))
            })
            .collect();
        Self { frames }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(ANALYTICS_HEADER)?;
        for r in self.rows() {
            wtr.write_record([
                r.ticker.to_string(),
                r.date.to_string(),
                r.open.to_string(),
                r.high.to_string(),
                r.low.to_string(),
                r.close.to_string(),
                r.volume.to_string(),
                fmt_opt(r.ma50),
                fmt_opt(r.ma200),
                fmt_opt(r.ema50),
                fmt_opt(r.ema200),
                fmt_opt(r.momentum63),
                fmt_opt(r.atr14),
                fmt_opt(r.fwd_return_21),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the format written by [`AnalyticsTable::write_csv`]; empty fields are undefined.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let idx: Vec<usize> = ANALYTICS_HEADER
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h.trim() == *name)
                    .ok_or_else(|| Error::MissingColumn(name.to_string()))
            })
            .collect::<Result<_>>()?;

        let mut frames: Vec<TickerFrame> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let get = |k: usize| rec.get(idx[k]).unwrap_or("").trim();
            let parse_err = |what: &str, v: &str| Error::Parse {
                line,
                message: format!("bad {what} {v:?}"),
            };
            let req = |k: usize| -> Result<f64> {
                get(k)
                    .parse::<f64>()
                    .map_err(|_| parse_err(ANALYTICS_HEADER[k], get(k)))
            };
            let opt = |k: usize| -> Result<Option<f64>> {
                match get(k) {
                    "" => Ok(None),
                    v => v
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| parse_err(ANALYTICS_HEADER[k], v)),
                }
            };
            let ticker = get(0);
            let date =
                Date::parse_from_str(get(1), "%Y-%m-%d").map_err(|_| parse_err("date", get(1)))?;
            let row = OwnedRow {
                date,
                open: req(2)?,
                high: req(3)?,
                low: req(4)?,
                close: req(5)?,
                volume: req(6)?,
                ma50: opt(7)?,
                ma200: opt(8)?,
                ema50: opt(9)?,
                ema200: opt(10)?,
                momentum63: opt(11)?,
                atr14: opt(12)?,
                fwd_return_21: opt(13)?,
            };
            match frames.last_mut() {
                Some(f) if f.ticker == ticker => f.push(&row),
                _ => {
                    let mut f = TickerFrame {
                        ticker: ticker.to_string(),
                        ..TickerFrame::default()
                    };
                    f.push(&row);
                    frames.push(f);
                }
            }
        }
        Self::from_frames(frames)
    }
}

/// Precomputes every indicator column, one pass per ticker (tickers in parallel).
pub fn build_analytics(
    universe: &[PriceSeries],
    params: &IndicatorParams,
) -> Result<AnalyticsTable> {
    let frames = universe
        .par_iter()
        .filter(|s| !s.is_empty())
        .map(|s| TickerFrame::compute(s, params))
        .collect::<Result<Vec<_>>>()?;
    AnalyticsTable::from_frames(frames)
}
