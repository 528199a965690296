use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use trendgate::analytics::{
    atr_pct_signal, cumulative_comparison, decile_analysis, momentum_signal,
    momentum_to_atr_signal, pearson, regime_split_means, signal_forward_pairs, write_decile_csv,
    PlotData,
};
use trendgate::indicators::AnalyticsRow;
use trendgate::AnalyticsTable;

use crate::commands::{load_table, write_json, write_with};
use crate::config::{RunConfig, SplitChoice};

/// An analysis that could not run, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdaWarning {
    pub analysis: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub signal: String,
    pub target: String,
    pub pearson: f64,
    pub observations: usize,
}

pub struct EdaOutcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<EdaWarning>,
    pub correlation: Option<f64>,
}

/// The six analysis files, in the order they are produced.
pub const EDA_FILES: [&str; 6] = [
    "correlation.json",
    "regime_split.csv",
    "momentum_deciles.csv",
    "atr_pct_buckets.csv",
    "momentum_atr_deciles.csv",
    "cumulative_comparison.csv",
];

type SignalFn = fn(&AnalyticsRow<'_>) -> Option<f64>;

/// Runs every analysis on the selected split (the whole table for `all`/`full`).
pub fn cmd_eda(cfg: &RunConfig) -> Result<EdaOutcome> {
    let mut table = load_table(cfg)?;
    let single = match cfg.run.split {
        SplitChoice::All | SplitChoice::Full => None,
        _ => cfg.split_runs()?.pop(),
    };
    if let Some(range) = single.and_then(|s| s.range) {
        table = table.between(range.start, range.end);
    }
    let out = run_eda(&table, cfg)?;
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    for w in &out.warnings {
        println!("skipped {}: {}", w.analysis, w.message);
    }
    Ok(out)
}

pub fn run_eda(table: &AnalyticsTable, cfg: &RunConfig) -> Result<EdaOutcome> {
    let dir = cfg.paths.out.join("eda");
    fs::create_dir_all(&dir)?;
    for name in EDA_FILES {
        let stale = dir.join(name);
        if stale.exists() {
            fs::remove_file(&stale)?;
        }
    }
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let mut warn = |analysis: &str, message: String| {
        log::warn!("eda {analysis} skipped: {message}");
        warnings.push(EdaWarning {
            analysis: analysis.to_string(),
            message,
        });
    };
    let mut plot = PlotData::default();

    let (mom, fwd) = signal_forward_pairs(table, momentum_signal);
    let stride = match cfg.eda.scatter_max_points {
        0 => 1,
        max => mom.len().div_ceil(max).max(1),
    };
    for (x, y) in mom.iter().zip(&fwd).step_by(stride) {
        plot.push("momentum_vs_forward", x, *y);
    }
    let mut correlation = None;
    match pearson(&mom, &fwd) {
        Ok(r) => {
            let path = dir.join(EDA_FILES[0]);
            write_json(
                &path,
                &Correlation {
                    signal: "momentum63".into(),
                    target: "fwd_return_21".into(),
                    pearson: r,
                    observations: mom.len(),
                },
            )?;
            correlation = Some(r);
            files.push(path);
        }
        Err(e) => warn("correlation", e.to_string()),
    }

    let split = regime_split_means(table);
    if split.above_count + split.below_count == 0 {
        warn(
            "regime_split",
            "no rows with both MA200 and forward return defined".into(),
        );
    } else {
        let path = dir.join(EDA_FILES[1]);
        let mut csv = String::from("regime,mean_forward_return,count\n");
        for (name, mean, count) in [
            ("above_ma200", split.above_ma200_mean, split.above_count),
            ("below_ma200", split.below_ma200_mean, split.below_count),
        ] {
            let shown = mean.map(|m| m.to_string()).unwrap_or_default();
            csv.push_str(&format!("{name},{shown},{count}\n"));
            if let Some(m) = mean {
                plot.push("regime_mean_forward", name, m);
            }
        }
        fs::write(&path, csv)?;
        files.push(path);
    }

    let bucketed: [(&str, &str, SignalFn); 3] = [
        ("momentum_deciles", EDA_FILES[2], momentum_signal),
        ("atr_pct_buckets", EDA_FILES[3], atr_pct_signal),
        ("momentum_atr_deciles", EDA_FILES[4], momentum_to_atr_signal),
    ];
    for (name, file, signal) in bucketed {
        let (s, f) = signal_forward_pairs(table, signal);
        match decile_analysis(&s, &f, cfg.eda.buckets) {
            Ok(t) => {
                let path = dir.join(file);
                write_with(&path, |w| write_decile_csv(&t, w))?;
                for r in &t.rows {
                    plot.push(name, r.decile, r.mean_forward_return);
                }
                files.push(path);
            }
            Err(e) => warn(name, e.to_string()),
        }
    }

    if table.calendar().len() < 2 {
        warn("cumulative_comparison", "fewer than 2 trading days".into());
    } else {
        let cc = cumulative_comparison(table, cfg.backtest.strategy.top_n)?;
        let path = dir.join(EDA_FILES[5]);
        let mut csv = String::from("date,top_momentum,market\n");
        for ((d, t), m) in cc.dates.iter().zip(&cc.top_momentum).zip(&cc.market) {
            csv.push_str(&format!("{d},{t},{m}\n"));
            plot.push("cumulative_top_momentum", d, *t);
            plot.push("cumulative_market", d, *m);
        }
        fs::write(&path, csv)?;
        files.push(path);
    }

    let path = dir.join("plot_data.csv");
    write_with(&path, |w| plot.write_csv(w))?;
    files.push(path);
    let path = dir.join("warnings.json");
    write_json(&path, &warnings)?;
    files.push(path);
    Ok(EdaOutcome {
        files,
        warnings,
        correlation,
    })
}
