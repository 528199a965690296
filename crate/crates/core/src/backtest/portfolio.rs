use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::strategy::{SignalAction, SignalReason};
use crate::types::Date;

/// An open long holding with its trailing-stop state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub ticker: String,
    pub entry_date: Date,
    pub entry_price: f64,
    pub quantity: f64,
    /// Running max of closes since entry, the entry-day close included.
    pub highest_close: f64,
}

/// Ratchets the highest close; nothing else changes.
pub fn update_trailing_state(position: &Position, close: f64) -> Position {
    Position {
        highest_close: position.highest_close.max(close),
        ..position.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    RegimeBreak,
    AtrStop,
    TrendExit,
    FixedStop,
    /// Ticker stopped trading while held; closed at its last available open.
    Delisted,
}

impl ExitReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::RegimeBreak => "regime_break",
            Self::AtrStop => "atr_stop",
            Self::TrendExit => "trend_exit",
            Self::FixedStop => "fixed_stop",
            Self::Delisted => "delisted",
        }
    }
}

impl fmt::Display for ExitReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<SignalReason> for ExitReason {
    fn from(r: SignalReason) -> Self {
        match r {
            SignalReason::RegimeBreak => Self::RegimeBreak,
            SignalReason::AtrStop => Self::AtrStop,
            SignalReason::TrendExit => Self::TrendExit,
            SignalReason::FixedStop | SignalReason::EntryAllConditions => Self::FixedStop,
        }
    }
}

/// A closed round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub ticker: String,
    pub entry_date: Date,
    pub entry_price: f64,
    pub exit_date: Date,
    pub exit_price: f64,
    pub quantity: f64,
    pub pnl: f64,
    pub exit_reason: ExitReason,
}

impl Trade {
    pub fn close(
        position: &Position,
        exit_date: Date,
        exit_price: f64,
        reason: ExitReason,
    ) -> Self {
        Self {
            ticker: position.ticker.clone(),
            entry_date: position.entry_date,
            entry_price: position.entry_price,
            exit_date,
            exit_price,
            quantity: position.quantity,
            pnl: position.quantity * (exit_price - position.entry_price),
            exit_reason: reason,
        }
    }
}

/// An executed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub date: Date,
    pub ticker: String,
    pub side: SignalAction,
    pub price: f64,
    pub quantity: f64,
    /// Cash moved by the fill (positive amount).
    pub notional: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquityPoint {
    pub date: Date,
    pub equity: f64,
    pub cash: f64,
    pub positions_value: f64,
    pub open_positions: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PortfolioState {
    pub cash: f64,
    pub positions: BTreeMap<String, Position>,
}

impl PortfolioState {
    pub fn new(cash: f64) -> Self {
        Self {
            cash,
            positions: BTreeMap::new(),
        }
    }

    /// Cash plus every position marked at `price_of(ticker)`.
    pub fn equity(&self, mut price_of: impl FnMut(&str) -> f64) -> f64 {
        self.cash
            + self
                .positions
                .values()
                .map(|p| p.quantity * price_of(&p.ticker))
                .sum::<f64>()
    }
}

/// Equal slice of current equity, capped at available cash. `None` when no slot is
/// free or nothing can be allocated.
pub fn size_position(
    equity: f64,
    cash: f64,
    open_positions: usize,
    max_positions: usize,
) -> Option<f64> {
    if max_positions == 0 || open_positions >= max_positions {
        return None;
    }
    let allocation = (equity / max_positions as f64).min(cash);
    (allocation > 0.0).then_some(allocation)
}
