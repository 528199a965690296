use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use trendgate::backtest::RunSummary;
use trendgate::{CleaningReport, MetricsSummary};

use crate::config::RunConfig;
use crate::eda::{Correlation, EdaWarning};

type MetricRow = (&'static str, fn(&MetricsSummary) -> Option<f64>, bool);

/// Rows of the comparison table: label, accessor, shown as a percentage.
const METRICS: [MetricRow; 5] = [
    ("Total Return", |m| Some(m.total_return), true),
    ("Sharpe Ratio", |m| m.sharpe, false),
    ("Max Drawdown", |m| Some(m.max_drawdown), true),
    ("Win Rate", |m| m.win_rate, true),
    ("Volatility", |m| Some(m.volatility), true),
];

/// `metric,<strategy>...` with raw fractions; undefined metrics are blank.
pub fn comparison_csv(runs: &[RunSummary]) -> String {
    let mut out = String::from("metric");
    for r in runs {
        out.push(',');
        out.push_str(r.strategy.name());
    }
    out.push('\n');
    for (label, get, _) in METRICS {
        out.push_str(label);
        for r in runs {
            out.push(',');
            if let Some(v) = get(&r.metrics) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

/// Side-by-side markdown table, one column per strategy.
pub fn comparison_markdown(runs: &[RunSummary]) -> String {
    let mut out = String::from("| Metric |");
    for r in runs {
        let name = r.strategy.name();
        out.push_str(&format!(
            " {}{} Strategy |",
            name[..1].to_uppercase(),
            &name[1..]
        ));
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(runs.len()));
    out.push('\n');
    for (label, get, pct) in METRICS {
        out.push_str(&format!("| {label} |"));
        for r in runs {
            let cell = match get(&r.metrics) {
                Some(v) if pct => format!("{:.2}%", v * 100.0),
                Some(v) => format!("{v:.2}"),
                None => "n/a".into(),
            };
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(v))
}

fn sorted_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    out.retain(|p| p.is_dir());
    out.sort();
    Ok(out)
}

/// Collects whatever clean, backtest and eda outputs exist into `report.md`.
pub fn cmd_report(cfg: &RunConfig) -> Result<PathBuf> {
    let out = &cfg.paths.out;
    let mut md = String::from("# Backtest report\n");
    let mut sections = 0;

    if let Some(r) = read_json::<CleaningReport>(&out.join("clean/cleaning_report.json"))? {
        sections += 1;
        md.push_str("\n## Data cleaning\n\n| Count | Value |\n|---|---:|\n");
        let rows = [
            ("input rows", r.input_rows),
            ("output rows", r.output_rows),
            ("duplicates removed", r.duplicates_removed),
            ("rows forward-filled", r.rows_forward_filled),
            ("rows dropped (missing)", r.rows_dropped_missing),
            ("rows dropped (invalid OHLC)", r.rows_dropped_invalid),
            (
                "tickers dropped (short history)",
                r.tickers_dropped_short_history,
            ),
            ("rows dropped (short history)", r.rows_dropped_short_history),
            ("rows dropped (outlier return)", r.rows_dropped_outlier),
            ("transcripts kept", r.transcripts_output),
            ("transcripts dropped", r.transcripts_dropped),
        ];
        for (label, v) in rows {
            md.push_str(&format!("| {label} | {v} |\n"));
        }
    }

    for split_dir in sorted_dirs(&out.join("backtest"))? {
        let mut runs = Vec::new();
        for sdir in sorted_dirs(&split_dir)? {
            if let Some(s) = read_json::<RunSummary>(&sdir.join("summary.json"))? {
                runs.push(s);
            }
        }
        if runs.is_empty() {
            continue;
        }
        sections += 1;
        let name = split_dir.file_name().unwrap_or_default().to_string_lossy();
        md.push_str(&format!("\n## Backtest: {name} split\n\n"));
        md.push_str(&comparison_markdown(&runs));
        md.push('\n');
        for r in &runs {
            md.push_str(&format!(
                "- {}: {} trades, equity {:.2} -> {:.2}, {} evaluation days\n",
                r.strategy, r.trades, r.initial_equity, r.final_equity, r.stats.evaluation_days
            ));
        }
    }

    let eda = out.join("eda");
    let corr = read_json::<Correlation>(&eda.join("correlation.json"))?;
    let warnings = read_json::<Vec<EdaWarning>>(&eda.join("warnings.json"))?;
    if corr.is_some() || warnings.is_some() {
        sections += 1;
        md.push_str("\n## Exploratory analysis\n\n");
        if let Some(c) = corr {
            md.push_str(&format!(
                "- Pearson correlation of {} with {}: {:.4} over {} observations\n",
                c.signal, c.target, c.pearson, c.observations
            ));
        }
        let regime = eda.join("regime_split.csv");
        if regime.exists() {
            for line in fs::read_to_string(&regime)?.lines().skip(1) {
                let cols: Vec<&str> = line.split(',').collect();
                if let [name, mean, count] = cols[..] {
                    md.push_str(&format!(
                        "- mean forward return {name}: {mean} ({count} rows)\n"
                    ));
                }
            }
        }
        for w in warnings.unwrap_or_default() {
            md.push_str(&format!("- skipped {}: {}\n", w.analysis, w.message));
        }
    }

    if sections == 0 {
        bail!(
            "nothing to report under {}; run clean, backtest or eda first",
            out.display()
        );
    }
    let path = out.join("report.md");
    fs::write(&path, md).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}
