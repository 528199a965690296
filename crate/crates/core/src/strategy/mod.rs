//! Signal generation: cross-sectional ranking, the sentiment gate, and the
//! entry/exit rules of the baseline and enhanced strategies.

mod calendar;
mod rank;
mod rules;
mod sentiment;

pub use calendar::{evaluation_dates, is_week_end};
pub use rank::{rank_top_n, RankCache, RankSnapshot, RankedTicker};
pub use rules::{
    entry_signal_baseline, entry_signal_enhanced, exit_signal_baseline, exit_signal_enhanced,
    Signal, SignalAction, SignalReason, StrategyKind, StrategyParams,
};
pub use sentiment::{
    load_sentiment_csv, read_sentiment_csv, sentiment_gate, write_sentiment_csv, GateState,
    SentimentBook, SentimentLabel, SentimentRecord, DEFAULT_VALIDITY_DAYS,
};
