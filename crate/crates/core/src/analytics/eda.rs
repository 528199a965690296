use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::AnalyticsTable;
use crate::strategy::{is_week_end, RankCache};
use crate::types::Date;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSplit {
    /// Mean forward return where close > MA200; `None` when the group is empty.
    pub above_ma200_mean: Option<f64>,
    pub above_count: usize,
    pub below_ma200_mean: Option<f64>,
    pub below_count: usize,
}

/// Mean forward return split by the close/MA200 regime.
pub fn regime_split_means(table: &AnalyticsTable) -> RegimeSplit {
    let (mut above, mut na, mut below, mut nb) = (0.0, 0usize, 0.0, 0usize);
    for r in table.rows() {
        let (Some(ma), Some(fwd)) = (r.ma200, r.fwd_return_21) else {
            continue;
        };
        if r.close > ma {
            above += fwd;
            na += 1;
        } else {
            below += fwd;
            nb += 1;
        }
    }
    RegimeSplit {
        above_ma200_mean: (na > 0).then(|| above / na as f64),
        above_count: na,
        below_ma200_mean: (nb > 0).then(|| below / nb as f64),
        below_count: nb,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecileRow {
    /// 1-based bucket, lowest signal first.
    pub decile: usize,
    pub mean_forward_return: f64,
    pub count: usize,
    pub signal_min: f64,
    pub signal_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileTable {
    pub rows: Vec<DecileRow>,
}

/// Rank-based bucketing: observations sorted by signal (stable, so ties keep input
/// order) and cut into `buckets` groups whose sizes differ by at most one.
pub fn decile_analysis(signal: &[f64], forward: &[f64], buckets: usize) -> Result<DecileTable> {
    if signal.len() != forward.len() {
        return Err(Error::arg("signal and forward lengths differ"));
    }
    if buckets == 0 {
        return Err(Error::arg("buckets must be >= 1"));
    }
    let n = signal.len();
    if n < buckets {
        return Err(Error::Degenerate(format!(
            "{n} observations for {buckets} buckets"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| signal[a].total_cmp(&signal[b]));

    let mut rows: Vec<DecileRow> = (1..=buckets)
        .map(|decile| DecileRow {
            decile,
            mean_forward_return: 0.0,
            count: 0,
            signal_min: f64::INFINITY,
            signal_max: f64::NEG_INFINITY,
        })
        .collect();
    for (rank, &i) in order.iter().enumerate() {
        let row = &mut rows[rank * buckets / n];
        row.mean_forward_return += forward[i];
        row.count += 1;
        row.signal_min = row.signal_min.min(signal[i]);
        row.signal_max = row.signal_max.max(signal[i]);
    }
    for row in &mut rows {
        row.mean_forward_return /= row.count as f64;
    }
    Ok(DecileTable { rows })
}

/// Paired (signal, forward) observations with both defined, in table order.
pub fn signal_forward_pairs(
    table: &AnalyticsTable,
    signal: impl Fn(&crate::indicators::AnalyticsRow<'_>) -> Option<f64>,
) -> (Vec<f64>, Vec<f64>) {
    table
        .rows()
        .filter_map(|r| Some(signal(&r)?).zip(r.fwd_return_21))
        .filter(|(s, _)| s.is_finite())
        .unzip()
}

pub fn momentum_signal(r: &crate::indicators::AnalyticsRow<'_>) -> Option<f64> {
    r.momentum63
}

/// ATR as a fraction of the close.
pub fn atr_pct_signal(r: &crate::indicators::AnalyticsRow<'_>) -> Option<f64> {
    r.atr14.map(|a| a / r.close)
}

/// Momentum per unit of ATR%; undefined when ATR is zero.
pub fn momentum_to_atr_signal(r: &crate::indicators::AnalyticsRow<'_>) -> Option<f64> {
    let atr_pct = atr_pct_signal(r)?;
    (atr_pct > 0.0)
        .then(|| r.momentum63.map(|m| m / atr_pct))
        .flatten()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeComparison {
    pub dates: Vec<Date>,
    pub top_momentum: Vec<f64>,
    pub market: Vec<f64>,
}

/// Growth of 1.0 for an equal-weight Top-N momentum basket against the universe.
///
/// The basket is re-ranked on each weekly evaluation date (as-of) and applies from
/// the next trading day. With no eligible basket the leg holds the universe average.
pub fn cumulative_comparison(table: &AnalyticsTable, top_n: usize) -> Result<CumulativeComparison> {
    if top_n == 0 {
        return Err(Error::arg("top_n must be >= 1"));
    }
    let calendar = table.calendar();
    let frames = table.frames();
    let mut cursor = vec![0usize; frames.len()];
    let cache = RankCache::new(true);
    let mut basket: Vec<usize> = Vec::new();

    let mut out = CumulativeComparison {
        dates: Vec::with_capacity(calendar.len()),
        top_momentum: Vec::with_capacity(calendar.len()),
        market: Vec::with_capacity(calendar.len()),
    };
    let (mut top_level, mut mkt_level) = (1.0_f64, 1.0_f64);
    let mut day_returns: Vec<Option<f64>> = vec![None; frames.len()];

    for (k, &day) in calendar.iter().enumerate() {
        for (fi, f) in frames.iter().enumerate() {
            let c = cursor[fi];
            day_returns[fi] = None;
            if c < f.len() && f.dates[c] == day {
                if c > 0 {
                    day_returns[fi] = Some(f.close[c] / f.close[c - 1] - 1.0);
                }
                cursor[fi] += 1;
            }
        }
        if k > 0 {
            let mean_of = |members: &mut dyn Iterator<Item = f64>| {
                let (s, n) = members.fold((0.0, 0usize), |(s, n), r| (s + r, n + 1));
                (n > 0).then(|| s / n as f64)
            };
            let mkt = mean_of(&mut day_returns.iter().flatten().copied()).unwrap_or(0.0);
            let top = mean_of(&mut basket.iter().filter_map(|&fi| day_returns[fi])).unwrap_or(mkt);
            mkt_level *= 1.0 + mkt;
            top_level *= 1.0 + top;
        }
        out.dates.push(day);
        out.top_momentum.push(top_level);
        out.market.push(mkt_level);

        if is_week_end(day, calendar.get(k + 1).copied()) {
            let snap = cache.get_or_rank(table, day, top_n)?;
            basket = snap
                .top_n()
                .iter()
                .filter_map(|r| table.frame_index(&r.ticker))
                .collect();
        }
    }
    Ok(out)
}

/// Long-format plot data: one `(series, x, y)` line per point.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct PlotData {
    rows: Vec<(String, String, f64)>,
}

impl PlotData {
    pub fn push(&mut self, series: &str, x: impl ToString, y: f64) {
        self.rows.push((series.to_string(), x.to_string(), y));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["series", "x", "y"])?;
        for (s, x, y) in &self.rows {
            wtr.write_record([s.as_str(), x.as_str(), &y.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn write_decile_csv<W: Write>(table: &DecileTable, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "decile",
        "mean_forward_return",
        "count",
        "signal_min",
        "signal_max",
    ])?;
    for r in &table.rows {
        wtr.write_record([
            r.decile.to_string(),
            r.mean_forward_return.to_string(),
            r.count.to_string(),
            r.signal_min.to_string(),
            r.signal_max.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
