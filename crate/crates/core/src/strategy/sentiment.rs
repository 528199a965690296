use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Date;

pub const DEFAULT_VALIDITY_DAYS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
}

impl FromStr for SentimentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(Self::Positive),
            "neutral" => Ok(Self::Neutral),
            "negative" => Ok(Self::Negative),
            other => Err(Error::arg(format!("unknown sentiment label {other:?}"))),
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positive => "positive",
            Self::Neutral => "neutral",
            Self::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentRecord {
    pub ticker: String,
    pub date: Date,
    pub label: SentimentLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateState {
    Open,
    Blocked,
}

/// Gate for one ticker on `as_of`, scanning the records directly.
///
/// Blocked iff the most recent record at or before `as_of` is negative and no older
/// than `validity_days`. Missing or stale sentiment leaves the gate open. When
/// several records share that latest date, any negative one blocks.
pub fn sentiment_gate(
    ticker: &str,
    as_of: Date,
    sentiments: &[SentimentRecord],
    validity_days: u32,
) -> GateState {
    let latest = sentiments
        .iter()
        .filter(|r| r.ticker == ticker && r.date <= as_of)
        .map(|r| r.date)
        .max();
    let Some(latest) = latest else {
        return GateState::Open;
    };
    if (as_of - latest).num_days() > i64::from(validity_days) {
        return GateState::Open;
    }
    let negative = sentiments
        .iter()
        .any(|r| r.ticker == ticker && r.date == latest && r.label == SentimentLabel::Negative);
    if negative {
        GateState::Blocked
    } else {
        GateState::Open
    }
}

/// Per-ticker index over sentiment records for repeated gate queries.
#[derive(Debug, Clone, Default)]
pub struct SentimentBook {
    by_ticker: HashMap<String, Vec<(Date, bool)>>,
    validity_days: u32,
}

impl SentimentBook {
    pub fn new(records: &[SentimentRecord], validity_days: u32) -> Self {
        let mut by_ticker: HashMap<String, Vec<(Date, bool)>> = HashMap::new();
        for r in records {
            by_ticker
                .entry(r.ticker.clone())
                .or_default()
                .push((r.date, r.label == SentimentLabel::Negative));
        }
        for v in by_ticker.values_mut() {
            // one entry per date: negative if any record on that date is negative
            v.sort();
            v.dedup_by(|later, earlier| {
                if later.0 == earlier.0 {
                    earlier.1 |= later.1;
                    true
                } else {
                    false
                }
            });
        }
        Self {
            by_ticker,
            validity_days,
        }
    }

    /// No records: every gate is open.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validity_days(&self) -> u32 {
        self.validity_days
    }

    pub fn gate(&self, ticker: &str, as_of: Date) -> GateState {
        let Some(entries) = self.by_ticker.get(ticker) else {
            return GateState::Open;
        };
        let n = entries.partition_point(|(d, _)| *d <= as_of);
        match n.checked_sub(1).map(|i| entries[i]) {
            Some((date, true)) if (as_of - date).num_days() <= i64::from(self.validity_days) => {
                GateState::Blocked
            }
            _ => GateState::Open,
        }
    }
}

pub fn load_sentiment_csv(path: impl AsRef<Path>) -> Result<Vec<SentimentRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read_sentiment_csv(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
}

/// Columns `ticker,date,label` (extra columns such as `model_score` ignored).
/// Lines starting with `#` are comments.
pub fn read_sentiment_csv<R: Read>(reader: R) -> Result<Vec<SentimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let (ti, di, li) = (col("ticker")?, col("date")?, col("label")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let raw_date = rec.get(di).unwrap_or("").trim();
        let date = Date::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| Error::Parse {
            line,
            message: format!("bad date {raw_date:?}"),
        })?;
        let label = rec
            .get(li)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        out.push(SentimentRecord {
            ticker: rec.get(ti).unwrap_or("").trim().to_string(),
            date,
            label,
        });
    }
    Ok(out)
}

pub fn write_sentiment_csv<W: Write>(records: &[SentimentRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["ticker", "date", "label"])?;
    for r in records {
        wtr.write_record([r.ticker.clone(), r.date.to_string(), r.label.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
