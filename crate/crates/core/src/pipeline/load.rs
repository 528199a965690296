use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::report::CleaningReport;
use crate::error::{Error, Result};
use crate::types::{Date, PriceSeries, RawBar, RawSeries};

/// Header names for the price CSV columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub ticker: String,
    pub date: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    pub volume: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            ticker: "ticker".into(),
            date: "date".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            volume: "volume".into(),
        }
    }
}

/// ISO-8601 dates (optionally with a time part) plus one fallback `strftime` pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateParser {
    pub fallback: Option<String>,
}

impl Default for DateParser {
    fn default() -> Self {
        Self {
            fallback: Some("%m/%d/%Y".into()),
        }
    }
}

impl DateParser {
    pub fn parse(&self, raw: &str) -> Option<Date> {
        let s = raw.trim();
        if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return Some(d);
        }
        // "2001-03-05T00:00:00" / "2001-03-05 16:00:00"
        if s.len() > 10 && s.is_char_boundary(10) {
            let (head, tail) = s.split_at(10);
            if tail.starts_with('T') || tail.starts_with(' ') {
                if let Ok(d) = NaiveDate::parse_from_str(head, "%Y-%m-%d") {
                    return Some(d);
                }
            }
        }
        self.fallback
            .as_deref()
            .and_then(|fmt| NaiveDate::parse_from_str(s, fmt).ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    pub columns: ColumnMap,
    pub dates: DateParser,
    /// Abort when more than this fraction of rows carry an unparseable date.
    pub max_bad_date_fraction: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            columns: ColumnMap::default(),
            dates: DateParser::default(),
            max_bad_date_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

/// Parsed, deduplicated, date-sorted rows grouped by ticker (sorted by ticker).
#[derive(Debug, Clone)]
pub struct LoadedPrices {
    pub series: Vec<RawSeries>,
    pub report: CleaningReport,
    pub row_errors: Vec<RowError>,
}

pub fn load_prices(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<LoadedPrices> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read_prices(std::io::BufReader::new(file), opts).map_err(|e| e.in_file(path))
}

fn parse_price(field: &[u8]) -> Option<f64> {
    let s = std::str::from_utf8(field).ok()?.trim();
    if s.is_empty() {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

pub fn read_prices<R: Read>(reader: R, opts: &LoadOptions) -> Result<LoadedPrices> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let c = &opts.columns;
    let idx = [
        column(&headers, &c.ticker)?,
        column(&headers, &c.date)?,
        column(&headers, &c.open)?,
        column(&headers, &c.high)?,
        column(&headers, &c.low)?,
        column(&headers, &c.close)?,
        column(&headers, &c.volume)?,
    ];

    let mut report = CleaningReport::default();
    let mut row_errors = Vec::new();
    let mut groups: HashMap<String, Vec<RawBar>> = HashMap::new();
    let mut record = csv::ByteRecord::new();

    while rdr.read_byte_record(&mut record)? {
        report.input_rows += 1;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(idx[i]).unwrap_or(b"");

        let ticker = std::str::from_utf8(field(0)).unwrap_or("").trim();
        if ticker.is_empty() {
            report.rows_dropped_missing += 1;
            row_errors.push(RowError {
                line,
                message: "missing ticker".into(),
            });
            continue;
        }
        let raw_date = String::from_utf8_lossy(field(1));
        let Some(date) = opts.dates.parse(&raw_date) else {
            report.rows_dropped_missing += 1;
            row_errors.push(RowError {
                line,
                message: format!("unparseable date {raw_date:?}"),
            });
            continue;
        };
        // Non-positive prices are treated as missing so forward fill can repair them.
        let price = |i: usize| parse_price(field(i)).filter(|v| *v > 0.0);
        let bar = RawBar {
            date,
            open: price(2),
            high: price(3),
            low: price(4),
            close: price(5),
            volume: parse_price(field(6)).filter(|v| *v >= 0.0),
        };
        match groups.get_mut(ticker) {
            Some(rows) => rows.push(bar),
            None => {
                groups.insert(ticker.to_string(), vec![bar]);
            }
        }
    }

    let bad_dates = row_errors
        .iter()
        .filter(|e| e.message.starts_with("unparseable date"))
        .count();
    if report.input_rows > 0
        && bad_dates as f64 / report.input_rows as f64 > opts.max_bad_date_fraction
    {
        return Err(Error::TooManyBadDates {
            bad: bad_dates,
            total: report.input_rows,
            allowed: opts.max_bad_date_fraction,
        });
    }

    let mut series: Vec<RawSeries> = groups
        .into_iter()
        .map(|(ticker, rows)| {
            let (rows, removed) = dedup_last_wins(rows);
            report.duplicates_removed += removed;
            RawSeries { ticker, rows }
        })
        .collect();
    series.sort_by(|a, b| a.ticker.cmp(&b.ticker));
    report.output_rows = series.iter().map(|s| s.rows.len()).sum();

    Ok(LoadedPrices {
        series,
        report,
        row_errors,
    })
}

/// Stable date sort, then keep the last occurrence of every date.
///
/// Exact duplicates collapse to one row; conflicting rows for the same date keep
/// the one that appeared last in the input.
pub fn dedup_last_wins(mut rows: Vec<RawBar>) -> (Vec<RawBar>, usize) {
    rows.sort_by_key(|r| r.date);
    let before = rows.len();
    let mut out: Vec<RawBar> = Vec::with_capacity(rows.len());
    for row in rows {
        match out.last_mut() {
            Some(last) if last.date == row.date => *last = row,
            _ => out.push(row),
        }
    }
    let removed = before - out.len();
    (out, removed)
}

pub const PRICE_HEADER: [&str; 7] = ["ticker", "date", "open", "high", "low", "close", "volume"];

/// Single CSV sorted by (ticker, date).
pub fn write_prices_csv<W: Write>(series: &[PriceSeries], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(PRICE_HEADER)?;
    let mut sorted: Vec<&PriceSeries> = series.iter().collect();
    sorted.sort_by(|a, b| a.ticker.cmp(&b.ticker));
    for s in sorted {
        write_series_rows(&mut wtr, s)?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_series_rows<W: Write>(wtr: &mut csv::Writer<W>, s: &PriceSeries) -> Result<()> {
    for b in &s.bars {
        wtr.write_record([
            s.ticker.clone(),
            b.date.to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    Ok(())
}

/// One `<TICKER>.csv` per series inside `dir`.
pub fn write_prices_dir(series: &[PriceSeries], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for s in series {
        let path = dir.join(format!("{}.csv", s.ticker));
        let file = File::create(&path).map_err(|e| Error::from(e).in_file(&path))?;
        let mut wtr = csv::Writer::from_writer(std::io::BufWriter::new(file));
        wtr.write_record(PRICE_HEADER)?;
        write_series_rows(&mut wtr, s)?;
        wtr.flush()?;
    }
    Ok(())
}
