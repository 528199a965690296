use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::portfolio::{
    size_position, update_trailing_state, EquityPoint, ExitReason, Fill, PortfolioState, Position,
    Trade,
};
use crate::error::{Error, Result};
use crate::indicators::AnalyticsTable;
use crate::strategy::{
    entry_signal_baseline, entry_signal_enhanced, exit_signal_baseline, exit_signal_enhanced,
    is_week_end, RankCache, SentimentBook, Signal, SignalAction, SignalReason, StrategyKind,
    StrategyParams,
};
use crate::types::Date;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BacktestConfig {
    pub initial_capital: f64,
    pub max_positions: usize,
    pub strategy: StrategyParams,
    /// Per-side cost in basis points, applied to the fill price.
    pub cost_bps: f64,
    pub start: Option<Date>,
    pub end: Option<Date>,
    /// A held ticker missing for this many consecutive trading days is force-closed.
    pub delist_after_days: usize,
    pub rank_cache: bool,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            initial_capital: 100_000.0,
            max_positions: 10,
            strategy: StrategyParams::default(),
            cost_bps: 0.0,
            start: None,
            end: None,
            delist_after_days: 5,
            rank_cache: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub trading_days: usize,
    pub evaluation_days: usize,
    pub rankings_computed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub strategy: StrategyKind,
    pub config: BacktestConfig,
    pub equity_curve: Vec<EquityPoint>,
    pub trades: Vec<Trade>,
    pub fills: Vec<Fill>,
    pub signals: Vec<Signal>,
    pub stats: RunStats,
}

impl BacktestResult {
    pub fn equity_values(&self) -> Vec<f64> {
        self.equity_curve.iter().map(|p| p.equity).collect()
    }

    pub fn position_counts(&self) -> Vec<(Date, usize)> {
        self.equity_curve
            .iter()
            .map(|p| (p.date, p.open_positions))
            .collect()
    }

    pub fn final_equity(&self) -> f64 {
        self.equity_curve
            .last()
            .map(|p| p.equity)
            .unwrap_or(self.config.initial_capital)
    }
}

#[derive(Debug, Clone, Copy)]
struct Order {
    frame: usize,
    side: SignalAction,
    reason: SignalReason,
    priority: usize,
}

pub fn run_backtest(
    table: &AnalyticsTable,
    strategy: StrategyKind,
    sentiments: &SentimentBook,
    config: &BacktestConfig,
) -> Result<BacktestResult> {
    let cache = RankCache::new(config.rank_cache);
    run_backtest_with_cache(table, strategy, sentiments, config, &cache)
}

/// Day-by-day simulation.
///
/// Each trading day: fill yesterday's orders at today's open (sells, then buys in
/// priority order), force-close delisted holdings, ratchet trailing highs, queue
/// exits, queue entries on weekly evaluation days, then mark to market at the close.
pub fn run_backtest_with_cache(
    table: &AnalyticsTable,
    strategy: StrategyKind,
    sentiments: &SentimentBook,
    config: &BacktestConfig,
    cache: &RankCache,
) -> Result<BacktestResult> {
    if table.is_empty() {
        return Err(Error::Empty("analytics table has no rows".into()));
    }
    if config.max_positions < 1 {
        return Err(Error::arg("max_positions must be >= 1"));
    }
    if config.initial_capital.is_nan() || config.initial_capital <= 0.0 {
        return Err(Error::arg("initial_capital must be > 0"));
    }
    if config.delist_after_days < 1 {
        return Err(Error::arg("delist_after_days must be >= 1"));
    }
    let params = config.strategy;
    let calendar: Vec<Date> = table
        .calendar()
        .into_iter()
        .filter(|d| config.start.is_none_or(|s| *d >= s) && config.end.is_none_or(|e| *d <= e))
        .collect();
    let Some(&first_day) = calendar.first() else {
        return Err(Error::NoDataInRange {
            start: config.start,
            end: config.end,
        });
    };
    let rank_table: Cow<'_, AnalyticsTable> = if params.weekly_compression {
        Cow::Owned(table.week_end_rows())
    } else {
        Cow::Borrowed(table)
    };

    let frames = table.frames();
    let frame_of = |ticker: &str| table.frame_index(ticker).expect("position ticker in table");
    let mut cursor: Vec<usize> = frames
        .iter()
        .map(|f| f.dates.partition_point(|d| *d < first_day))
        .collect();
    let mut today: Vec<Option<usize>> = vec![None; frames.len()];
    // (calendar index, row index) of each ticker's latest row so far
    let mut last_row: Vec<Option<(usize, usize)>> = vec![None; frames.len()];
    let mut has_order = vec![false; frames.len()];

    let cost = config.cost_bps / 10_000.0;
    let mut state = PortfolioState::new(config.initial_capital);
    let mut pending: Vec<Order> = Vec::new();
    let mut equity_curve = Vec::with_capacity(calendar.len());
    let mut trades = Vec::new();
    let mut fills = Vec::new();
    let mut signals = Vec::new();
    let mut stats = RunStats {
        trading_days: calendar.len(),
        ..RunStats::default()
    };
    let rankings_before = cache.rankings_computed();

    for (k, &day) in calendar.iter().enumerate() {
        for (fi, f) in frames.iter().enumerate() {
            let c = cursor[fi];
            if c < f.len() && f.dates[c] == day {
                today[fi] = Some(c);
                last_row[fi] = Some((k, c));
                cursor[fi] += 1;
            } else {
                today[fi] = None;
            }
        }
        let last_close = |fi: usize| last_row[fi].map(|(_, i)| frames[fi].close[i]);

        // Yesterday's orders fill at today's open.
        let mut orders = std::mem::take(&mut pending);
        orders.sort_by_key(|o| (o.side == SignalAction::Buy, o.priority, o.frame));
        for o in orders {
            let f = &frames[o.frame];
            match o.side {
                SignalAction::Sell => {
                    let Some(i) = today[o.frame] else {
                        pending.push(o);
                        continue;
                    };
                    let Some(pos) = state.positions.remove(&f.ticker) else {
                        continue;
                    };
                    let price = f.open[i] * (1.0 - cost);
                    let notional = pos.quantity * price;
                    state.cash += notional;
                    fills.push(Fill {
                        date: day,
                        ticker: f.ticker.clone(),
                        side: SignalAction::Sell,
                        price,
                        quantity: pos.quantity,
                        notional,
                    });
                    trades.push(Trade::close(&pos, day, price, ExitReason::from(o.reason)));
                }
                SignalAction::Buy => {
                    let Some(i) = today[o.frame] else { continue };
                    if state.positions.contains_key(&f.ticker) {
                        continue;
                    }
                    let equity = state.equity(|t| {
                        let fi = frame_of(t);
                        match today[fi] {
                            Some(j) => frames[fi].open[j],
                            None => last_close(fi).expect("held ticker has a row"),
                        }
                    });
                    let Some(allocation) = size_position(
                        equity,
                        state.cash,
                        state.positions.len(),
                        config.max_positions,
                    ) else {
                        continue;
                    };
                    let price = f.open[i] * (1.0 + cost);
                    let quantity = allocation / price;
                    if quantity.is_nan() || quantity <= 0.0 {
                        continue;
                    }
                    state.cash = (state.cash - allocation).max(0.0);
                    state.positions.insert(
                        f.ticker.clone(),
                        Position {
                            ticker: f.ticker.clone(),
                            entry_date: day,
                            entry_price: price,
                            quantity,
                            highest_close: f.close[i],
                        },
                    );
                    fills.push(Fill {
                        date: day,
                        ticker: f.ticker.clone(),
                        side: SignalAction::Buy,
                        price,
                        quantity,
                        notional: allocation,
                    });
                }
            }
        }

        // Holdings whose ticker has gone quiet for too long.
        let delisted: Vec<usize> = state
            .positions
            .keys()
            .map(|t| frame_of(t))
            .filter(|&fi| {
                today[fi].is_none()
                    && last_row[fi].is_some_and(|(lk, _)| k - lk >= config.delist_after_days)
            })
            .collect();
        for fi in delisted {
            let f = &frames[fi];
            let pos = state.positions.remove(&f.ticker).expect("held");
            let (_, i) = last_row[fi].expect("seen");
            let price = f.open[i] * (1.0 - cost);
            let notional = pos.quantity * price;
            state.cash += notional;
            fills.push(Fill {
                date: day,
                ticker: f.ticker.clone(),
                side: SignalAction::Sell,
                price,
                quantity: pos.quantity,
                notional,
            });
            trades.push(Trade::close(&pos, day, price, ExitReason::Delisted));
            pending.retain(|o| o.frame != fi);
        }

        has_order.iter_mut().for_each(|h| *h = false);
        for o in &pending {
            has_order[o.frame] = true;
        }

        for pos in state.positions.values_mut() {
            let fi = frame_of(&pos.ticker);
            if let Some(i) = today[fi] {
                *pos = update_trailing_state(pos, frames[fi].close[i]);
            }
        }

        for pos in state.positions.values() {
            let fi = frame_of(&pos.ticker);
            let Some(i) = today[fi] else { continue };
            if has_order[fi] {
                continue;
            }
            let row = frames[fi].row(i).signal_view();
            let exit = match strategy {
                StrategyKind::Enhanced => exit_signal_enhanced(&row, pos, params.atr_multiple),
                StrategyKind::Baseline => {
                    exit_signal_baseline(&row, pos, params.baseline_stop_loss)
                }
            };
            if let Some(sig) = exit {
                pending.push(Order {
                    frame: fi,
                    side: SignalAction::Sell,
                    reason: sig.reason,
                    priority: 0,
                });
                has_order[fi] = true;
                signals.push(sig);
            }
        }

        if is_week_end(day, calendar.get(k + 1).copied()) {
            stats.evaluation_days += 1;
            for (fi, f) in frames.iter().enumerate() {
                let Some(i) = today[fi] else { continue };
                if has_order[fi] || state.positions.contains_key(&f.ticker) {
                    continue;
                }
                let row = f.row(i).signal_view();
                let gate = sentiments.gate(&f.ticker, day);
                let (enter, priority) = match strategy {
                    StrategyKind::Baseline => (entry_signal_baseline(&row, gate), 0),
                    StrategyKind::Enhanced => {
                        let snap = cache.get_or_rank(&rank_table, day, params.top_n)?;
                        let enter = entry_signal_enhanced(&row, &snap, gate);
                        (enter, snap.rank_of(&f.ticker).unwrap_or(usize::MAX))
                    }
                };
                if enter {
                    pending.push(Order {
                        frame: fi,
                        side: SignalAction::Buy,
                        reason: SignalReason::EntryAllConditions,
                        priority,
                    });
                    has_order[fi] = true;
                    signals.push(Signal::buy(&row));
                }
            }
        }

        let positions_value: f64 = state
            .positions
            .values()
            .map(|p| p.quantity * last_close(frame_of(&p.ticker)).expect("held ticker has a row"))
            .sum();
        equity_curve.push(EquityPoint {
            date: day,
            equity: state.cash + positions_value,
            cash: state.cash,
            positions_value,
            open_positions: state.positions.len(),
        });
    }

    stats.rankings_computed = cache.rankings_computed() - rankings_before;
    Ok(BacktestResult {
        strategy,
        config: config.clone(),
        equity_curve,
        trades,
        fills,
        signals,
        stats,
    })
}
