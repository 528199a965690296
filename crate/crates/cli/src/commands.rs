use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use trendgate::backtest::{
    write_equity_csv, write_positions_csv, write_signals_csv, write_trades_csv, RunSummary,
};
use trendgate::pipeline::{
    clean_loaded, load_and_clean_transcripts, load_prices, record_transcripts, universe_of,
    write_prices_csv, write_prices_dir, write_transcripts_csv,
};
use trendgate::strategy::load_sentiment_csv;
use trendgate::synth::{generate, PlantedDefects};
use trendgate::{
    build_analytics, run_backtest, AnalyticsTable, CleaningReport, PriceSeries, SentimentBook,
};

use crate::config::{CleanLayout, RunConfig};
use crate::report::{comparison_csv, comparison_markdown};

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub(crate) fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> trendgate::Result<()>,
) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    Ok(())
}

/// Loads and cleans the configured price file.
pub fn load_clean(cfg: &RunConfig) -> Result<(Vec<PriceSeries>, CleaningReport)> {
    let path = cfg.prices_path()?;
    let loaded = load_prices(path, &cfg.load)?;
    if loaded.report.input_rows == 0 {
        bail!("{}: no price rows", path.display());
    }
    for e in loaded.row_errors.iter().take(20) {
        log::warn!("{}:{}: {}", path.display(), e.line, e.message);
    }
    Ok(clean_loaded(&loaded, &cfg.clean))
}

/// Cleaned prices joined with their indicators.
pub fn load_table(cfg: &RunConfig) -> Result<AnalyticsTable> {
    let (series, _) = load_clean(cfg)?;
    let table = build_analytics(&series, &cfg.indicators)?;
    if table.is_empty() {
        bail!("no ticker survives cleaning");
    }
    Ok(table)
}

pub struct CleanOutcome {
    pub report: CleaningReport,
    pub files: Vec<PathBuf>,
}

pub fn cmd_clean(cfg: &RunConfig) -> Result<CleanOutcome> {
    let (series, mut report) = load_clean(cfg)?;
    let dir = cfg.paths.out.join("clean");
    let mut files = Vec::new();
    match cfg.output.clean_layout {
        CleanLayout::Single => {
            let path = dir.join("prices.csv");
            write_with(&path, |w| write_prices_csv(&series, w))?;
            files.push(path);
        }
        CleanLayout::PerTicker => {
            let path = dir.join("prices");
            if path.exists() {
                fs::remove_dir_all(&path)
                    .with_context(|| format!("clearing {}", path.display()))?;
            }
            write_prices_dir(&series, &path)?;
            files.push(path);
        }
    }
    if let Some(tpath) = &cfg.paths.transcripts {
        let (kept, stats) =
            load_and_clean_transcripts(tpath, &universe_of(&series), &cfg.load.dates)?;
        record_transcripts(&mut report, kept.len(), &stats);
        let path = dir.join("transcripts.csv");
        write_with(&path, |w| write_transcripts_csv(&kept, w))?;
        files.push(path);
    }
    let path = dir.join("cleaning_report.json");
    write_json(&path, &report)?;
    files.push(path);

    println!(
        "cleaned {} rows into {} rows across {} tickers",
        report.input_rows,
        report.output_rows,
        series.len()
    );
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(CleanOutcome { report, files })
}

pub fn cmd_backtest(cfg: &RunConfig) -> Result<Vec<RunSummary>> {
    let table = load_table(cfg)?;
    let records = match &cfg.paths.sentiment {
        Some(p) => load_sentiment_csv(p)?,
        None => Vec::new(),
    };
    let book = SentimentBook::new(&records, cfg.backtest.strategy.sentiment_validity_days);

    let runs = cfg.split_runs()?;
    let calendar = table.calendar();
    for run in &runs {
        if let Some(r) = run.range {
            if !calendar.iter().any(|d| r.contains(*d)) {
                bail!(
                    "split `{}` has no data in {}..={}",
                    run.name,
                    r.start,
                    r.end
                );
            }
        }
    }

    let kinds = cfg.run.strategy.kinds();
    let mut summaries = Vec::new();
    for run in &runs {
        let mut bt = cfg.backtest.clone();
        if let Some(r) = run.range {
            bt.start = Some(r.start);
            bt.end = Some(r.end);
        }
        let dir = cfg.paths.out.join("backtest").join(run.name);
        let mut split_summaries = Vec::new();
        for kind in &kinds {
            let result = run_backtest(&table, *kind, &book, &bt)
                .with_context(|| format!("split `{}`, strategy {kind}", run.name))?;
            let sdir = dir.join(kind.name());
            write_with(&sdir.join("equity.csv"), |w| write_equity_csv(&result, w))?;
            write_with(&sdir.join("trades.csv"), |w| write_trades_csv(&result, w))?;
            write_with(&sdir.join("positions.csv"), |w| {
                write_positions_csv(&result, w)
            })?;
            write_with(&sdir.join("signals.csv"), |w| write_signals_csv(&result, w))?;
            let summary = RunSummary::from_result(&result, Some(run.name), &cfg.metrics)
                .with_context(|| format!("metrics for split `{}`, strategy {kind}", run.name))?;
            write_json(&sdir.join("summary.json"), &summary)?;
            println!(
                "{} {}: {} trades, final equity {:.2}",
                run.name, kind, summary.trades, summary.final_equity
            );
            split_summaries.push(summary);
        }
        if split_summaries.len() > 1 {
            let csv = comparison_csv(&split_summaries);
            let md = comparison_markdown(&split_summaries);
            fs::write(dir.join("comparison.csv"), csv)?;
            fs::write(dir.join("comparison.md"), &md)?;
            println!("\n{} split\n\n{md}", run.name);
        }
        summaries.extend(split_summaries);
    }
    Ok(summaries)
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<PlantedDefects> {
    let data = generate(&cfg.synth)?;
    let dir = cfg.paths.out.join("synth");
    data.write_dir(&dir)?;
    let p = data.planted;
    println!(
        "wrote {} price rows ({} duplicates, {} gaps, {} outliers planted) and {} transcripts to {}",
        p.input_rows,
        p.duplicates,
        p.gaps,
        p.outliers,
        p.transcripts,
        dir.display()
    );
    Ok(p)
}
