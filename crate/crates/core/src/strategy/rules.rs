use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rank::RankSnapshot;
use super::sentiment::GateState;
use crate::backtest::Position;
use crate::error::{Error, Result};
use crate::indicators::SignalRow;
use crate::types::Date;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Close above the 50-day average, sentiment gate, fixed 20% stop.
    Baseline,
    /// Regime + trend + momentum + Top-N + sentiment, ATR trailing stop.
    Enhanced,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Enhanced => "enhanced",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(Self::Baseline),
            "enhanced" => Ok(Self::Enhanced),
            other => Err(Error::arg(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    pub top_n: usize,
    pub atr_multiple: f64,
    /// Baseline fixed stop as a fractional loss from entry.
    pub baseline_stop_loss: f64,
    pub sentiment_validity_days: u32,
    /// Rank on week-end rows only.
    pub weekly_compression: bool,
}

impl Default for StrategyParams {
    fn default() -> Self {
        Self {
            top_n: 10,
            atr_multiple: 3.5,
            baseline_stop_loss: 0.20,
            sentiment_validity_days: super::sentiment::DEFAULT_VALIDITY_DAYS,
            weekly_compression: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SignalAction {
    Buy,
    Sell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalReason {
    EntryAllConditions,
    RegimeBreak,
    AtrStop,
    TrendExit,
    FixedStop,
}

impl SignalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EntryAllConditions => "entry_all_conditions",
            Self::RegimeBreak => "regime_break",
            Self::AtrStop => "atr_stop",
            Self::TrendExit => "trend_exit",
            Self::FixedStop => "fixed_stop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signal {
    pub ticker: String,
    pub date: Date,
    pub action: SignalAction,
    pub reason: SignalReason,
}

impl Signal {
    fn sell(row: &SignalRow<'_>, reason: SignalReason) -> Self {
        Self {
            ticker: row.ticker.to_string(),
            date: row.date,
            action: SignalAction::Sell,
            reason,
        }
    }

    pub fn buy(row: &SignalRow<'_>) -> Self {
        Self {
            ticker: row.ticker.to_string(),
            date: row.date,
            action: SignalAction::Buy,
            reason: SignalReason::EntryAllConditions,
        }
    }
}

fn above(value: f64, level: Option<f64>) -> bool {
    level.is_some_and(|l| value > l)
}

/// All five entry layers; any undefined indicator vetoes.
pub fn entry_signal_enhanced(
    row: &SignalRow<'_>,
    snapshot: &RankSnapshot,
    gate: GateState,
) -> bool {
    let trend = match (row.ema50, row.ema200) {
        (Some(fast), Some(slow)) => fast > slow && row.close > fast,
        _ => false,
    };
    above(row.close, row.ma200)
        && trend
        && row.momentum63.is_some_and(|m| m > 0.0)
        && snapshot.in_top_n(row.ticker)
        && gate == GateState::Open
}

/// Regime break first, then the ATR trailing stop. Undefined inputs skip their clause.
pub fn exit_signal_enhanced(
    row: &SignalRow<'_>,
    position: &Position,
    atr_multiple: f64,
) -> Option<Signal> {
    if row.ma200.is_some_and(|ma| row.close < ma) {
        return Some(Signal::sell(row, SignalReason::RegimeBreak));
    }
    let stop = row
        .atr14
        .map(|atr| position.highest_close - atr_multiple * atr);
    if stop.is_some_and(|s| row.close < s) {
        return Some(Signal::sell(row, SignalReason::AtrStop));
    }
    None
}

pub fn entry_signal_baseline(row: &SignalRow<'_>, gate: GateState) -> bool {
    above(row.close, row.ma50) && gate == GateState::Open
}

/// Fixed stop (at or beyond the loss bound) first, then close below the 50-day average.
pub fn exit_signal_baseline(
    row: &SignalRow<'_>,
    position: &Position,
    stop_loss: f64,
) -> Option<Signal> {
    if row.close <= position.entry_price - position.entry_price * stop_loss {
        return Some(Signal::sell(row, SignalReason::FixedStop));
    }
    if row.ma50.is_some_and(|ma| row.close < ma) {
        return Some(Signal::sell(row, SignalReason::TrendExit));
    }
    None
}
