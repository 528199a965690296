use std::io::Write;

use serde::{Deserialize, Serialize};

use super::engine::{BacktestConfig, BacktestResult, RunStats};
use crate::analytics::{compute_metrics, drawdown_series, MetricConventions, MetricsSummary};
use crate::error::Result;
use crate::strategy::StrategyKind;

/// `date,equity,drawdown`
pub fn write_equity_csv<W: Write>(result: &BacktestResult, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["date", "equity", "drawdown"])?;
    let dd = drawdown_series(&result.equity_values());
    for (p, d) in result.equity_curve.iter().zip(dd) {
        wtr.write_record([p.date.to_string(), p.equity.to_string(), d.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_trades_csv<W: Write>(result: &BacktestResult, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "ticker",
        "entry_date",
        "entry_price",
        "exit_date",
        "exit_price",
        "quantity",
        "pnl",
        "exit_reason",
    ])?;
    for t in &result.trades {
        wtr.write_record([
            t.ticker.clone(),
            t.entry_date.to_string(),
            t.entry_price.to_string(),
            t.exit_date.to_string(),
            t.exit_price.to_string(),
            t.quantity.to_string(),
            t.pnl.to_string(),
            t.exit_reason.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `date,open_positions`
pub fn write_positions_csv<W: Write>(result: &BacktestResult, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["date", "open_positions"])?;
    for (d, n) in result.position_counts() {
        wtr.write_record([d.to_string(), n.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_signals_csv<W: Write>(result: &BacktestResult, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["date", "ticker", "action", "reason"])?;
    for s in &result.signals {
        let action = match s.action {
            crate::strategy::SignalAction::Buy => "BUY",
            crate::strategy::SignalAction::Sell => "SELL",
        };
        wtr.write_record([
            s.date.to_string(),
            s.ticker.clone(),
            action.into(),
            s.reason.as_str().into(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Per-run summary: config echo plus the metric block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub strategy: StrategyKind,
    pub split: Option<String>,
    pub config: BacktestConfig,
    pub conventions: MetricConventions,
    pub metrics: MetricsSummary,
    pub initial_equity: f64,
    pub final_equity: f64,
    pub trades: usize,
    pub stats: RunStats,
}

impl RunSummary {
    pub fn from_result(
        result: &BacktestResult,
        split: Option<&str>,
        conventions: &MetricConventions,
    ) -> Result<Self> {
        Ok(Self {
            strategy: result.strategy,
            split: split.map(str::to_string),
            config: result.config.clone(),
            conventions: *conventions,
            metrics: compute_metrics(&result.equity_values(), &result.trades, conventions)?,
            initial_equity: result.config.initial_capital,
            final_equity: result.final_equity(),
            trades: result.trades.len(),
            stats: result.stats,
        })
    }
}
