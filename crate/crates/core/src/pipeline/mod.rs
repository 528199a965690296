//! Ingestion and cleaning of raw price and transcript files.
//!
//! Steps run in a fixed order: dedup and date standardization on load, forward
//! fill, minimum-history filter, outlier-return removal, then transcript
//! filtering against the surviving universe.

mod clean;
mod load;
mod report;
mod transcripts;
mod weekly;

use std::collections::HashSet;

pub use clean::{
    clean_series, clean_universe, drop_inconsistent, filter_min_history, forward_fill,
    remove_outlier_returns, remove_outliers_to_fixpoint, CleanOptions, FillStats,
    DEFAULT_MAX_ABS_DAILY_RETURN, DEFAULT_MIN_HISTORY_DAYS,
};
pub use load::{
    dedup_last_wins, load_prices, read_prices, write_prices_csv, write_prices_dir, ColumnMap,
    DateParser, LoadOptions, LoadedPrices, RowError, PRICE_HEADER,
};
pub use report::CleaningReport;
pub use transcripts::{
    load_and_clean_transcripts, read_and_clean_transcripts, write_transcripts_csv,
    TranscriptRecord, TranscriptStats, MIN_TRANSCRIPT_CHARS,
};
pub use weekly::compress_to_weekly;

use crate::types::PriceSeries;

/// Runs the price-cleaning steps on already-loaded rows and merges the load report.
pub fn clean_loaded(
    loaded: &LoadedPrices,
    opts: &CleanOptions,
) -> (Vec<PriceSeries>, CleaningReport) {
    let (series, clean_report) = clean_universe(&loaded.series, opts);
    let mut report = loaded.report;
    let CleaningReport {
        output_rows,
        rows_forward_filled,
        rows_dropped_missing,
        rows_dropped_invalid,
        tickers_dropped_short_history,
        rows_dropped_short_history,
        rows_dropped_outlier,
        ..
    } = clean_report;
    report.output_rows = output_rows;
    report.rows_forward_filled += rows_forward_filled;
    report.rows_dropped_missing += rows_dropped_missing;
    report.rows_dropped_invalid += rows_dropped_invalid;
    report.tickers_dropped_short_history += tickers_dropped_short_history;
    report.rows_dropped_short_history += rows_dropped_short_history;
    report.rows_dropped_outlier += rows_dropped_outlier;
    (series, report)
}

/// Folds transcript-cleaning counts into a price report.
pub fn record_transcripts(report: &mut CleaningReport, kept: usize, stats: &TranscriptStats) {
    report.transcripts_input += stats.input;
    report.transcripts_output += kept;
    report.transcripts_dropped += stats.dropped();
}

pub fn universe_of(series: &[PriceSeries]) -> HashSet<String> {
    series.iter().map(|s| s.ticker.clone()).collect()
}
