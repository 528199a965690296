//! Command-line orchestration of the trendgate pipeline: clean, backtest, eda, synth
//! and report, driven by one TOML config plus flag overrides.

pub mod commands;
pub mod config;
pub mod eda;
pub mod report;

use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::{Parser, Subcommand};

pub use config::{RunConfig, SplitChoice, StrategyChoice};

#[derive(Debug, Parser)]
#[command(
    name = "trendgate",
    version,
    about = "Momentum strategy backtesting pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub strategy: Option<StrategyChoice>,

    #[arg(long, global = true, value_enum)]
    pub split: Option<SplitChoice>,

    /// Output directory (overrides `paths.out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker thread cap for per-ticker parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for synthetic data (overrides `synth.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Load, clean and write the price data (and transcripts, if configured).
    Clean,
    /// Run the selected strategies over the selected splits.
    Backtest,
    /// Exploratory analyses of the indicator table.
    Eda,
    /// Write a seeded synthetic dataset with planted defects.
    Synth,
    /// Collect existing outputs into a markdown report.
    Report,
}

impl Cli {
    /// Config file (or defaults) with flag overrides applied, validated.
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.paths.out = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.synth.seed = seed;
        }
        if let Some(s) = self.strategy {
            cfg.run.strategy = s;
        }
        if let Some(s) = self.split {
            cfg.run.split = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.resolve_config()?;
    let dispatch = || match cli.command {
        Command::Clean => commands::cmd_clean(&cfg).map(drop),
        Command::Backtest => commands::cmd_backtest(&cfg).map(drop),
        Command::Eda => eda::cmd_eda(&cfg).map(drop),
        Command::Synth => commands::cmd_synth(&cfg).map(drop),
        Command::Report => report::cmd_report(&cfg).map(drop),
    };
    match cli.threads {
        Some(n) => {
            ensure!(n >= 1, "--threads must be >= 1");
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()?
                .install(dispatch)
        }
        None => dispatch(),
    }
}

/// Machine-readable form of a failure: the message and its cause chain.
pub fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let causes: Vec<String> = err.chain().skip(1).map(ToString::to_string).collect();
    serde_json::json!({
        "error": {
            "message": err.to_string(),
            "causes": causes,
        }
    })
}
