//! Evaluation metrics and exploratory analysis of the analytics table.

mod eda;
mod metrics;

pub use eda::{
    atr_pct_signal, cumulative_comparison, decile_analysis, momentum_signal,
    momentum_to_atr_signal, regime_split_means, signal_forward_pairs, write_decile_csv,
    CumulativeComparison, DecileRow, DecileTable, PlotData, RegimeSplit,
};
pub use metrics::{
    annualized_volatility, compute_metrics, daily_returns, drawdown_series, max_drawdown, pearson,
    pearson_correlation, sharpe, total_return, win_rate, MetricConventions, MetricsSummary,
};
