//! Event-loop portfolio simulation over an [`AnalyticsTable`](crate::indicators::AnalyticsTable).

mod engine;
mod output;
mod portfolio;

pub use engine::{run_backtest, run_backtest_with_cache, BacktestConfig, BacktestResult, RunStats};
pub use output::{
    write_equity_csv, write_positions_csv, write_signals_csv, write_trades_csv, RunSummary,
};
pub use portfolio::{
    size_position, update_trailing_state, EquityPoint, ExitReason, Fill, PortfolioState, Position,
    Trade,
};
