use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::load::DateParser;
use crate::error::{Error, Result};
use crate::types::Date;

pub const MIN_TRANSCRIPT_CHARS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub ticker: String,
    pub date: Date,
    pub text: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStats {
    pub input: usize,
    pub dropped_short: usize,
    pub dropped_unknown_ticker: usize,
    pub dropped_bad_date: usize,
}

impl TranscriptStats {
    pub fn dropped(&self) -> usize {
        self.dropped_short + self.dropped_unknown_ticker + self.dropped_bad_date
    }
}

pub fn load_and_clean_transcripts(
    path: impl AsRef<Path>,
    universe: &HashSet<String>,
    dates: &DateParser,
) -> Result<(Vec<TranscriptRecord>, TranscriptStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read_and_clean_transcripts(std::io::BufReader::new(file), universe, dates)
        .map_err(|e| e.in_file(path))
}

/// Columns `ticker,date,transcript`; text may contain quoted newlines.
///
/// Drops missing or short (< 100 characters) texts, unknown tickers and unparseable
/// dates. Output is sorted by (ticker, date).
pub fn read_and_clean_transcripts<R: Read>(
    reader: R,
    universe: &HashSet<String>,
    dates: &DateParser,
) -> Result<(Vec<TranscriptRecord>, TranscriptStats)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let (ti, di, xi) = (col("ticker")?, col("date")?, col("transcript")?);

    let mut stats = TranscriptStats::default();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        stats.input += 1;
        let ticker = rec.get(ti).unwrap_or("").trim();
        let text = rec.get(xi).unwrap_or("");
        if text.chars().count() < MIN_TRANSCRIPT_CHARS {
            stats.dropped_short += 1;
            continue;
        }
        if !universe.contains(ticker) {
            stats.dropped_unknown_ticker += 1;
            continue;
        }
        let Some(date) = dates.parse(rec.get(di).unwrap_or("")) else {
            stats.dropped_bad_date += 1;
            continue;
        };
        out.push(TranscriptRecord {
            ticker: ticker.to_string(),
            date,
            text: text.to_string(),
        });
    }
    out.sort_by(|a, b| (&a.ticker, a.date).cmp(&(&b.ticker, b.date)));
    Ok((out, stats))
}

pub fn write_transcripts_csv<W: Write>(records: &[TranscriptRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["ticker", "date", "transcript"])?;
    for r in records {
        wtr.write_record([r.ticker.as_str(), &r.date.to_string(), r.text.as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}
