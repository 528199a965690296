use std::path::{Component, Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use trendgate::synth::SynthConfig;
use trendgate::{
    BacktestConfig, CleanOptions, Date, IndicatorParams, LoadOptions, MetricConventions,
    StrategyKind,
};

/// Everything a run needs, read from one TOML file. Every section is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub run: RunSelection,
    pub splits: Splits,
    pub load: LoadOptions,
    pub clean: CleanOptions,
    pub output: OutputOptions,
    pub indicators: IndicatorParams,
    pub backtest: BacktestConfig,
    pub metrics: MetricConventions,
    pub eda: EdaOptions,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            run: RunSelection::default(),
            splits: Splits::default(),
            load: LoadOptions::default(),
            clean: CleanOptions::default(),
            output: OutputOptions::default(),
            indicators: IndicatorParams::default(),
            backtest: BacktestConfig::default(),
            metrics: MetricConventions::default(),
            eda: EdaOptions::default(),
            synth: default_synth(),
        }
    }
}

/// Synthetic data spanning the default development and validation splits.
fn default_synth() -> SynthConfig {
    SynthConfig {
        days: 6522,
        ..SynthConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw or cleaned price CSV.
    pub prices: Option<PathBuf>,
    /// Earnings-call transcripts (`ticker,date,transcript`).
    pub transcripts: Option<PathBuf>,
    /// Sentiment labels (`ticker,date,label[,model_score]`); gate is open without it.
    pub sentiment: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            prices: None,
            transcripts: None,
            sentiment: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSelection {
    pub strategy: StrategyChoice,
    pub split: SplitChoice,
}

impl Default for RunSelection {
    fn default() -> Self {
        Self {
            strategy: StrategyChoice::Both,
            split: SplitChoice::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyChoice {
    Baseline,
    Enhanced,
    Both,
}

impl StrategyChoice {
    pub fn kinds(self) -> Vec<StrategyKind> {
        match self {
            Self::Baseline => vec![StrategyKind::Baseline],
            Self::Enhanced => vec![StrategyKind::Enhanced],
            Self::Both => vec![StrategyKind::Baseline, StrategyKind::Enhanced],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SplitChoice {
    Development,
    Validation,
    Test,
    /// Every configured split.
    All,
    /// The whole dataset, bounded only by `backtest.start` / `backtest.end`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateRange {
    pub start: Date,
    pub end: Date,
}

impl DateRange {
    fn years(from: i32, to: i32) -> Self {
        Self {
            start: Date::from_ymd_opt(from, 1, 1).expect("valid date"),
            end: Date::from_ymd_opt(to, 12, 31).expect("valid date"),
        }
    }

    pub fn contains(&self, d: Date) -> bool {
        (self.start..=self.end).contains(&d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Splits {
    pub development: DateRange,
    pub validation: DateRange,
    pub test: Option<DateRange>,
}

impl Default for Splits {
    fn default() -> Self {
        Self {
            development: DateRange::years(2000, 2017),
            validation: DateRange::years(2018, 2024),
            test: None,
        }
    }
}

impl Splits {
    pub fn named(&self) -> Vec<(&'static str, DateRange)> {
        let mut out = vec![
            ("development", self.development),
            ("validation", self.validation),
        ];
        if let Some(t) = self.test {
            out.push(("test", t));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanLayout {
    /// One `prices.csv` sorted by (ticker, date).
    #[default]
    Single,
    /// One `<ticker>.csv` per ticker under `prices/`.
    PerTicker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub clean_layout: CleanLayout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdaOptions {
    /// Bucket count for the decile and ATR% analyses.
    pub buckets: usize,
    /// Upper bound on scatter points in the plot data (evenly strided); 0 keeps all.
    pub scatter_max_points: usize,
}

impl Default for EdaOptions {
    fn default() -> Self {
        Self {
            buckets: 10,
            scatter_max_points: 20_000,
        }
    }
}

/// A run restricted to one date window, or to the whole dataset when `range` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRun {
    pub name: &'static str,
    pub range: Option<DateRange>,
}

impl RunConfig {
    /// Parses a TOML file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.resolve_against(base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in self.splits.named() {
            ensure!(
                r.start <= r.end,
                "split `{name}` starts after it ends ({} > {})",
                r.start,
                r.end
            );
        }
        let named = self.splits.named();
        for w in named.windows(2) {
            let ((a, ra), (b, rb)) = (w[0], w[1]);
            ensure!(
                ra.end < rb.start,
                "split `{a}` must end before split `{b}` starts"
            );
        }
        self.paths.ensure_distinct()?;
        ensure!(self.eda.buckets >= 1, "eda.buckets must be >= 1");
        Ok(())
    }

    pub fn prices_path(&self) -> Result<&Path> {
        match &self.paths.prices {
            Some(p) => Ok(p),
            None => bail!("paths.prices is not set"),
        }
    }

    pub fn split_runs(&self) -> Result<Vec<SplitRun>> {
        let pick = |name: &'static str| {
            self.splits
                .named()
                .into_iter()
                .find(|(n, _)| *n == name)
                .map(|(name, r)| SplitRun {
                    name,
                    range: Some(r),
                })
                .with_context(|| format!("split `{name}` is not configured"))
        };
        Ok(match self.run.split {
            SplitChoice::Development => vec![pick("development")?],
            SplitChoice::Validation => vec![pick("validation")?],
            SplitChoice::Test => vec![pick("test")?],
            SplitChoice::All => self
                .splits
                .named()
                .into_iter()
                .map(|(name, r)| SplitRun {
                    name,
                    range: Some(r),
                })
                .collect(),
            SplitChoice::Full => vec![SplitRun {
                name: "full",
                range: None,
            }],
        })
    }
}

impl Paths {
    fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.prices, &mut self.transcripts, &mut self.sentiment]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.out);
    }

    fn ensure_distinct(&self) -> Result<()> {
        let named = [
            ("paths.prices", self.prices.as_ref()),
            ("paths.transcripts", self.transcripts.as_ref()),
            ("paths.sentiment", self.sentiment.as_ref()),
            ("paths.out", Some(&self.out)),
        ];
        let present: Vec<(&str, PathBuf)> = named
            .iter()
            .filter_map(|(n, p)| p.map(|p| (*n, normalize(p))))
            .collect();
        for (i, (a, pa)) in present.iter().enumerate() {
            for (b, pb) in &present[i + 1..] {
                ensure!(
                    pa != pb,
                    "{a} and {b} refer to the same path {}",
                    pa.display()
                );
            }
        }
        Ok(())
    }
}

/// Lexical normalization: drops `.` and folds `..` where possible.
fn normalize(p: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in p.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir if out.file_name().is_some() => {
                out.pop();
            }
            c => out.push(c),
        }
    }
    out
}
