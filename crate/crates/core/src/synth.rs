//! Seeded synthetic universes for tests, benchmarks and desk-scale runs.
//!
//! Prices follow a geometric random walk driven by a regime-switching market
//! factor plus idiosyncratic noise. A subset of "winner" tickers carries extra
//! persistent drift. Defects are planted at known positions and counted in
//! [`PlantedDefects`] so cleaning can be checked against them exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, Duration, Weekday};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{write_transcripts_csv, TranscriptRecord, MIN_TRANSCRIPT_CHARS};
use crate::strategy::{write_sentiment_csv, SentimentLabel, SentimentRecord};
use crate::types::{Date, RawBar, RawSeries};

/// Daily simple returns are clipped to this magnitude before defects are planted.
pub const MAX_GENERATED_MOVE: f64 = 0.2;
/// Price multiplier for a planted outlier bar.
pub const OUTLIER_MULTIPLIER: f64 = 2.5;
/// Minimum index distance between any two planted defects.
const DEFECT_SPACING: usize = 3;

/// One stretch of market behaviour, in trading days.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarketRegime {
    pub days: usize,
    /// Mean daily log return of the market factor.
    pub drift: f64,
    pub vol: f64,
    /// Every `rally_every` days a `rally_days` bear-market rally with `rally_drift`.
    pub rally_every: usize,
    pub rally_days: usize,
    pub rally_drift: f64,
    /// Log return of the market on the day each rally ends.
    pub rally_end_jump: f64,
}

impl MarketRegime {
    pub fn steady(days: usize, drift: f64, vol: f64) -> Self {
        Self {
            days,
            drift,
            vol,
            rally_every: 0,
            rally_days: 0,
            rally_drift: 0.0,
            rally_end_jump: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub tickers: usize,
    pub start: Date,
    /// Weekday trading days in the common calendar.
    pub days: usize,
    /// Regimes in order; the last one extends to the end of the calendar, whatever its `days`.
    pub regimes: Vec<MarketRegime>,
    pub beta_min: f64,
    pub beta_max: f64,
    pub idio_vol: f64,
    pub winner_fraction: f64,
    /// Extra daily log drift of winner tickers.
    pub winner_drift: f64,
    /// Loser tickers carry the same drift with the opposite sign.
    pub loser_fraction: f64,
    /// Fraction of full-history tickers whose data stops early.
    pub delisted_fraction: f64,
    /// Fraction of full-history tickers whose data starts late.
    pub late_start_fraction: f64,
    /// Tickers (on top of `tickers`) with fewer bars than `short_history_days`.
    pub short_history_tickers: usize,
    pub short_history_days: usize,
    /// Shortest span kept by late-start or delisted tickers.
    pub min_history_days: usize,
    pub duplicate_rate: f64,
    pub gap_rate: f64,
    pub outlier_rate: f64,
    pub transcript_every: usize,
    pub short_transcript_rate: f64,
    pub negative_rate: f64,
    pub positive_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            tickers: 20,
            start: Date::from_ymd_opt(2000, 1, 3).expect("valid date"),
            days: 1500,
            regimes: vec![MarketRegime::steady(0, 0.0003, 0.01)],
            beta_min: 0.6,
            beta_max: 1.4,
            idio_vol: 0.015,
            winner_fraction: 0.2,
            winner_drift: 0.0008,
            loser_fraction: 0.2,
            delisted_fraction: 0.1,
            late_start_fraction: 0.1,
            short_history_tickers: 1,
            short_history_days: 300,
            min_history_days: 800,
            duplicate_rate: 0.002,
            gap_rate: 0.002,
            outlier_rate: 0.001,
            transcript_every: 63,
            short_transcript_rate: 0.1,
            negative_rate: 0.15,
            positive_rate: 0.35,
        }
    }
}

impl SynthConfig {
    /// A bull market, a drawn-out crash with sharp bear rallies, then recovery.
    pub fn trending_crash(seed: u64) -> Self {
        Self {
            seed,
            tickers: 80,
            days: 2000,
            regimes: vec![
                MarketRegime::steady(900, 0.0006, 0.008),
                MarketRegime::steady(30, -0.01, 0.025),
                MarketRegime {
                    days: 400,
                    drift: -0.006,
                    vol: 0.02,
                    rally_every: 40,
                    rally_days: 15,
                    rally_drift: 0.008,
                    rally_end_jump: -0.05,
                },
                MarketRegime::steady(0, 0.0006, 0.009),
            ],
            beta_min: 0.8,
            beta_max: 1.3,
            idio_vol: 0.012,
            winner_fraction: 0.15,
            winner_drift: 0.0009,
            ..Self::default()
        }
    }

    /// No defects, no short or truncated tickers.
    pub fn clean(mut self) -> Self {
        self.duplicate_rate = 0.0;
        self.gap_rate = 0.0;
        self.outlier_rate = 0.0;
        self.short_history_tickers = 0;
        self.delisted_fraction = 0.0;
        self.late_start_fraction = 0.0;
        self
    }

    fn validate(&self) -> Result<()> {
        let rates = [
            self.duplicate_rate,
            self.gap_rate,
            self.outlier_rate,
            self.winner_fraction,
            self.loser_fraction,
            self.delisted_fraction,
            self.late_start_fraction,
            self.short_transcript_rate,
            self.negative_rate,
            self.positive_rate,
        ];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::arg("rates and fractions must lie in [0, 1]"));
        }
        if self.negative_rate + self.positive_rate > 1.0 {
            return Err(Error::arg("negative_rate + positive_rate must be <= 1"));
        }
        if self.regimes.is_empty() {
            return Err(Error::arg("at least one market regime is required"));
        }
        if self.beta_min > self.beta_max {
            return Err(Error::arg("beta_min must be <= beta_max"));
        }
        if self.min_history_days > self.days {
            return Err(Error::arg("min_history_days must be <= days"));
        }
        Ok(())
    }
}

/// Exact counts of what was planted, keyed like the cleaning report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedDefects {
    pub input_rows: usize,
    pub duplicates: usize,
    pub gaps: usize,
    pub outliers: usize,
    pub short_history_tickers: usize,
    pub short_history_rows: usize,
    pub transcripts: usize,
    pub transcripts_short: usize,
    pub transcripts_unknown_ticker: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TickerKind {
    Winner,
    Loser,
    Neutral,
    Short,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    /// Raw rows in file order, duplicates and gaps included.
    pub raw: Vec<RawSeries>,
    pub kinds: Vec<(String, TickerKind)>,
    pub transcripts: Vec<TranscriptRecord>,
    /// Planted labels for every transcript that survives cleaning.
    pub sentiment: Vec<SentimentRecord>,
    pub planted: PlantedDefects,
}

pub fn ticker_name(i: usize) -> String {
    format!("T{i:04}")
}

/// The first `days` weekdays on or after `start`.
pub fn weekday_calendar(start: Date, days: usize) -> Vec<Date> {
    let mut out = Vec::with_capacity(days);
    let mut d = start;
    while out.len() < days {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn market_returns(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(cfg.days);
    let mut regimes = cfg.regimes.iter();
    let mut current = regimes.next().copied().expect("validated");
    let mut left = current.days;
    let mut in_regime = 0usize;
    for _ in 0..cfg.days {
        if left == 0 {
            if let Some(next) = regimes.next() {
                current = *next;
                left = current.days;
                in_regime = 0;
            }
        }
        let (rally, rally_end) = if current.rally_every > 0 {
            let phase = in_regime % current.rally_every;
            let start = current.rally_every - current.rally_days.min(current.rally_every);
            (phase >= start, in_regime > 0 && phase == 0)
        } else {
            (false, false)
        };
        let drift = if rally {
            current.rally_drift
        } else {
            current.drift
        };
        let jump = if rally_end {
            current.rally_end_jump
        } else {
            0.0
        };
        let z: f64 = rng.sample(StandardNormal);
        out.push(drift + jump + current.vol * z);
        left = left.saturating_sub(1);
        in_regime += 1;
    }
    out
}

/// Picks up to `count` indices in `lo..hi`, pairwise at least `DEFECT_SPACING` apart
/// and away from anything already in `taken`.
fn pick_spaced(
    rng: &mut ChaCha8Rng,
    lo: usize,
    hi: usize,
    count: usize,
    taken: &mut [bool],
) -> Vec<usize> {
    if count == 0 || hi <= lo {
        return Vec::new();
    }
    let mut candidates: Vec<usize> = (lo..hi).collect();
    candidates.shuffle(rng);
    let mut picked = Vec::with_capacity(count);
    for i in candidates {
        if picked.len() == count {
            break;
        }
        let a = i.saturating_sub(DEFECT_SPACING - 1);
        let b = (i + DEFECT_SPACING).min(taken.len());
        if taken[a..b].iter().any(|t| *t) {
            continue;
        }
        taken[i] = true;
        picked.push(i);
    }
    picked.sort_unstable();
    picked
}

fn planted_count(rate: f64, eligible: usize) -> usize {
    (rate * eligible as f64).round() as usize
}

struct TickerOut {
    series: RawSeries,
    kind: TickerKind,
    duplicates: usize,
    gaps: usize,
    outliers: usize,
    transcripts: Vec<(TranscriptRecord, SentimentLabel, bool)>,
}

const POSITIVE_LINES: [&str; 3] = [
    "We delivered record revenue this quarter and see strong growth ahead across every segment.",
    "Margins expanded meaningfully and demand remains robust, so we are raising full-year guidance.",
    "Customer wins accelerated and our backlog is at an all-time high, which gives us real confidence.",
];
const NEUTRAL_LINES: [&str; 3] = [
    "Results were broadly in line with our expectations and we are maintaining our current outlook.",
    "The quarter played out as planned, with steady volumes and costs tracking the prior year.",
    "We continue to execute on the plan we laid out and have no change to guidance at this time.",
];
const NEGATIVE_LINES: [&str; 3] = [
    "Revenue declined sharply and we are withdrawing guidance given weak demand and rising costs.",
    "We missed expectations badly this quarter and expect further impairments and restructuring charges.",
    "Orders collapsed and liquidity is tight, so we are suspending the dividend and cutting headcount.",
];

fn transcript_text(rng: &mut ChaCha8Rng, label: SentimentLabel, short: bool) -> String {
    let lines = match label {
        SentimentLabel::Positive => &POSITIVE_LINES,
        SentimentLabel::Neutral => &NEUTRAL_LINES,
        SentimentLabel::Negative => &NEGATIVE_LINES,
    };
    let line = lines[rng.random_range(0..lines.len())];
    if short {
        let len = rng.random_range(20..MIN_TRANSCRIPT_CHARS);
        return line.chars().take(len).collect();
    }
    let opener = "Operator: good afternoon and welcome to the quarterly earnings call. ";
    format!("{opener}{line} Thank you all for joining us today.")
}

fn generate_ticker(
    cfg: &SynthConfig,
    index: usize,
    calendar: &[Date],
    market: &[f64],
) -> TickerOut {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64 + 1);
    let ticker = ticker_name(index);

    let short = index >= cfg.tickers;
    let kind = if short {
        TickerKind::Short
    } else {
        let u: f64 = rng.random();
        if u < cfg.winner_fraction {
            TickerKind::Winner
        } else if u < cfg.winner_fraction + cfg.loser_fraction {
            TickerKind::Loser
        } else {
            TickerKind::Neutral
        }
    };
    let drift = match kind {
        TickerKind::Winner => cfg.winner_drift,
        TickerKind::Loser => -cfg.winner_drift,
        _ => 0.0,
    };
    let beta = rng.random_range(cfg.beta_min..=cfg.beta_max);

    let n = calendar.len();
    let (first, last) = if short {
        let len = cfg.short_history_days.min(n);
        let first = rng.random_range(0..=n - len);
        (first, first + len)
    } else {
        let slack = n - cfg.min_history_days;
        let first = if slack > 0 && rng.random::<f64>() < cfg.late_start_fraction {
            rng.random_range(1..=slack)
        } else {
            0
        };
        let room = n - first - cfg.min_history_days;
        let last = if room > 0 && rng.random::<f64>() < cfg.delisted_fraction {
            n - rng.random_range(1..=room)
        } else {
            n
        };
        (first, last)
    };

    let mut close = 20.0 + 80.0 * rng.random::<f64>();
    let mut bars = Vec::with_capacity(last - first);
    for t in first..last {
        let z: f64 = rng.sample(StandardNormal);
        let log_ret = beta * market[t] + drift + cfg.idio_vol * z;
        let ret = log_ret
            .exp_m1()
            .clamp(-MAX_GENERATED_MOVE, MAX_GENERATED_MOVE);
        let prev = close;
        close = prev * (1.0 + ret);
        let open_gap: f64 = 0.3 * cfg.idio_vol * rng.sample::<f64, _>(StandardNormal);
        let open = (prev * (1.0 + open_gap.clamp(-0.05, 0.05))).max(1e-6);
        let hi_pad = 1.0 + 0.5 * cfg.idio_vol * rng.random::<f64>();
        let lo_pad = 1.0 - 0.5 * cfg.idio_vol * rng.random::<f64>();
        let volume = (1.0e6 * (0.5 + rng.random::<f64>())).round();
        bars.push(RawBar {
            date: calendar[t],
            open: Some(open),
            high: Some(open.max(close) * hi_pad),
            low: Some(open.min(close) * lo_pad),
            close: Some(close),
            volume: Some(volume),
        });
    }

    // Defects never touch the first two rows or the last one.
    let (mut dup_at, mut gap_at, mut out_at) = (Vec::new(), Vec::new(), Vec::new());
    if !short && bars.len() > 3 {
        let (lo, hi) = (2, bars.len() - 1);
        let eligible = hi - lo;
        let mut taken = vec![false; bars.len()];
        out_at = pick_spaced(
            &mut rng,
            lo,
            hi,
            planted_count(cfg.outlier_rate, eligible),
            &mut taken,
        );
        gap_at = pick_spaced(
            &mut rng,
            lo,
            hi,
            planted_count(cfg.gap_rate, eligible),
            &mut taken,
        );
        dup_at = pick_spaced(
            &mut rng,
            lo,
            hi,
            planted_count(cfg.duplicate_rate, eligible),
            &mut taken,
        );
    }
    for &i in &out_at {
        let b = &mut bars[i];
        for f in [&mut b.open, &mut b.high, &mut b.low, &mut b.close] {
            *f = f.map(|v| v * OUTLIER_MULTIPLIER);
        }
    }
    for &i in &gap_at {
        let b = &mut bars[i];
        (b.open, b.high, b.low, b.close, b.volume) = (None, None, None, None, None);
    }
    let mut rows = Vec::with_capacity(bars.len() + dup_at.len());
    let mut dups = dup_at.iter().peekable();
    for (i, b) in bars.iter().enumerate() {
        rows.push(*b);
        if dups.next_if(|&&d| d == i).is_some() {
            rows.push(*b);
        }
    }

    let mut transcripts = Vec::new();
    if cfg.transcript_every > 0 && !bars.is_empty() {
        let mut t = rng.random_range(0..cfg.transcript_every.min(bars.len()));
        while t < bars.len() {
            let u: f64 = rng.random();
            let label = if u < cfg.negative_rate {
                SentimentLabel::Negative
            } else if u < cfg.negative_rate + cfg.positive_rate {
                SentimentLabel::Positive
            } else {
                SentimentLabel::Neutral
            };
            let is_short = rng.random::<f64>() < cfg.short_transcript_rate;
            let text = transcript_text(&mut rng, label, is_short);
            transcripts.push((
                TranscriptRecord {
                    ticker: ticker.clone(),
                    date: bars[t].date,
                    text,
                },
                label,
                is_short,
            ));
            t += cfg.transcript_every;
        }
    }

    TickerOut {
        series: RawSeries { ticker, rows },
        kind,
        duplicates: dup_at.len(),
        gaps: gap_at.len(),
        outliers: out_at.len(),
        transcripts,
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let calendar = weekday_calendar(cfg.start, cfg.days);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let market = market_returns(cfg, &mut rng);

    let outs: Vec<TickerOut> = (0..cfg.tickers + cfg.short_history_tickers)
        .into_par_iter()
        .map(|i| generate_ticker(cfg, i, &calendar, &market))
        .collect();

    let mut planted = PlantedDefects::default();
    let mut data = SynthData {
        raw: Vec::with_capacity(outs.len()),
        kinds: Vec::with_capacity(outs.len()),
        transcripts: Vec::new(),
        sentiment: Vec::new(),
        planted,
    };
    for o in outs {
        planted.input_rows += o.series.rows.len();
        planted.duplicates += o.duplicates;
        planted.gaps += o.gaps;
        planted.outliers += o.outliers;
        let short = o.kind == TickerKind::Short;
        if short {
            planted.short_history_tickers += 1;
            planted.short_history_rows += o.series.rows.len();
        }
        for (rec, label, is_short) in o.transcripts {
            planted.transcripts += 1;
            if is_short {
                planted.transcripts_short += 1;
            } else if short {
                planted.transcripts_unknown_ticker += 1;
            } else {
                data.sentiment.push(SentimentRecord {
                    ticker: rec.ticker.clone(),
                    date: rec.date,
                    label,
                });
            }
            data.transcripts.push(rec);
        }
        data.kinds.push((o.series.ticker.clone(), o.kind));
        data.raw.push(o.series);
    }
    data.planted = planted;
    Ok(data)
}

pub const RAW_HEADER: [&str; 7] = ["ticker", "date", "open", "high", "low", "close", "volume"];

/// Raw rows as CSV; missing fields are written empty.
pub fn write_raw_csv<W: Write>(series: &[RawSeries], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(RAW_HEADER)?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in series {
        for r in &s.rows {
            wtr.write_record([
                s.ticker.clone(),
                r.date.to_string(),
                fmt(r.open),
                fmt(r.high),
                fmt(r.low),
                fmt(r.close),
                fmt(r.volume),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

impl SynthData {
    /// Writes `prices.csv`, `transcripts.csv`, `sentiment.csv` and `planted.json`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            File::create(&path)
                .map(BufWriter::new)
                .map_err(|e| Error::from(e).in_file(path))
        };
        write_raw_csv(&self.raw, open("prices.csv")?)?;
        write_transcripts_csv(&self.transcripts, open("transcripts.csv")?)?;
        write_sentiment_csv(&self.sentiment, open("sentiment.csv")?)?;
        let mut w = open("planted.json")?;
        serde_json::to_writer_pretty(&mut w, &self.planted)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn tickers_of(&self, kind: TickerKind) -> Vec<&str> {
        self.kinds
            .iter()
            .filter(|(_, k)| *k == kind)
            .map(|(t, _)| t.as_str())
            .collect()
    }
}
