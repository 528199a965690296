mod common;

use std::fmt::Write as _;

use common::oracles;
use trendgate::backtest::{
    run_backtest, write_equity_csv, write_signals_csv, write_trades_csv, BacktestConfig,
    BacktestResult, ExitReason,
};
use trendgate::indicators::AnalyticsTable;
use trendgate::strategy::{
    SentimentBook, SentimentLabel, SentimentRecord, SignalAction, StrategyKind,
};
use trendgate::synth::weekday_calendar;
use trendgate::Date;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn golden_table() -> AnalyticsTable {
    let f = std::fs::File::open(format!("{FIXTURES}/golden_analytics.csv")).unwrap();
    AnalyticsTable::read_csv(f).unwrap()
}

fn csv_of(
    r: &BacktestResult,
    w: fn(&BacktestResult, &mut Vec<u8>) -> trendgate::Result<()>,
) -> String {
    let mut buf = Vec::new();
    w(r, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn equity_csv(r: &BacktestResult) -> String {
    csv_of(r, |r, b| write_equity_csv(r, b))
}

fn trades_csv(r: &BacktestResult) -> String {
    csv_of(r, |r, b| write_trades_csv(r, b))
}

/// Rows `(close, ma50, ma200, ema50, ema200, momentum, atr)` for one ticker, open = previous close.
type Bars = Vec<(f64, f64, f64, f64, f64, f64, f64)>;

fn table_csv(rows: &[(&str, Bars)]) -> AnalyticsTable {
    let mut s = String::from(
        "ticker,date,open,high,low,close,volume,ma50,ma200,ema50,ema200,momentum63,atr14,fwd_return_21\n",
    );
    for (ticker, bars) in rows {
        let days = weekday_calendar(Date::from_ymd_opt(2024, 1, 1).unwrap(), bars.len());
        for (i, &(c, m50, m200, e50, e200, mom, atr)) in bars.iter().enumerate() {
            let o = if i == 0 { c } else { bars[i - 1].0 };
            writeln!(
                s,
                "{ticker},{},{o},{},{},{c},1000,{m50},{m200},{e50},{e200},{mom},{atr},",
                days[i],
                o.max(c) + 0.5,
                o.min(c) - 0.5
            )
            .unwrap();
        }
    }
    AnalyticsTable::read_csv(s.as_bytes()).unwrap()
}

#[test]
fn golden_fixture_reproduces_byte_for_byte() {
    let table = golden_table();
    let r = run_backtest(
        &table,
        StrategyKind::Enhanced,
        &SentimentBook::empty(),
        &BacktestConfig::default(),
    )
    .unwrap();
    let golden_eq = std::fs::read_to_string(format!("{FIXTURES}/golden_equity.csv")).unwrap();
    let golden_tr = std::fs::read_to_string(format!("{FIXTURES}/golden_trades.csv")).unwrap();
    assert_eq!(equity_csv(&r), golden_eq);
    assert_eq!(trades_csv(&r), golden_tr);

    let reasons: Vec<(&str, ExitReason, String)> = r
        .trades
        .iter()
        .map(|t| (t.ticker.as_str(), t.exit_reason, t.exit_date.to_string()))
        .collect();
    assert_eq!(
        reasons,
        vec![
            ("AAA", ExitReason::AtrStop, "2024-02-05".to_string()),
            ("BBB", ExitReason::RegimeBreak, "2024-02-20".to_string()),
            ("CCC", ExitReason::Delisted, "2024-03-04".to_string()),
        ]
    );
    // AAA: bought at 104, highest close 120, ATR 2 -> stop 113; close 112 on 2024-02-02, sold at next open 112.
    assert_eq!(
        (r.trades[0].entry_price, r.trades[0].exit_price),
        (104.0, 112.0)
    );
    // CCC: last bar 2024-02-26 (open 33.9), detected after five missing days.
    assert_eq!(r.trades[2].exit_price, 33.9);
}

/// Writes the golden files from the reference simulator. Run with `--ignored` after
/// deliberately changing the fixture.
#[test]
#[ignore]
fn regenerate_golden_files() {
    let r = oracles::reference_enhanced(&golden_table(), 100_000.0, 10, 10, 3.5, 5);
    std::fs::write(format!("{FIXTURES}/golden_equity.csv"), r.equity_csv).unwrap();
    std::fs::write(format!("{FIXTURES}/golden_trades.csv"), r.trades_csv).unwrap();
}

#[test]
fn reference_simulator_agrees_with_golden_files() {
    let r = oracles::reference_enhanced(&golden_table(), 100_000.0, 10, 10, 3.5, 5);
    assert_eq!(
        r.equity_csv,
        std::fs::read_to_string(format!("{FIXTURES}/golden_equity.csv")).unwrap()
    );
    assert_eq!(
        r.trades_csv,
        std::fs::read_to_string(format!("{FIXTURES}/golden_trades.csv")).unwrap()
    );
}

#[test]
fn no_entries_means_flat_equity() {
    let u = common::universe(&common::small_config(31, 6));
    // A negative call on every trading day keeps every gate shut.
    let sentiment: Vec<SentimentRecord> = u
        .table
        .frames()
        .iter()
        .flat_map(|f| {
            f.dates.iter().map(|d| SentimentRecord {
                ticker: f.ticker.clone(),
                date: *d,
                label: SentimentLabel::Negative,
            })
        })
        .collect();
    let book = SentimentBook::new(&sentiment, 100);
    for kind in [StrategyKind::Baseline, StrategyKind::Enhanced] {
        let r = run_backtest(&u.table, kind, &book, &BacktestConfig::default()).unwrap();
        assert!(r.trades.is_empty() && r.fills.is_empty());
        assert!(r.equity_values().iter().all(|e| *e == 100_000.0));
    }
}

#[test]
fn single_round_trip() {
    // Entry on Friday 2024-01-05, fill Monday at 100; regime break on day 9, fill day 10 at 110.
    let mut bars = Vec::new();
    for i in 0..15 {
        let c = if i < 5 {
            98.0 + 0.5 * i as f64
        } else {
            100.0 + 1.25 * (i - 4) as f64
        };
        let c = if i == 4 { 100.0 } else { c };
        let c = if i == 9 { 110.0 } else { c };
        let ma200 = if i == 9 { 111.0 } else { 50.0 };
        let mom = if i >= 9 { -0.1 } else { 0.2 };
        bars.push((c, 60.0, ma200, 70.0, 60.0, mom, 1.0));
    }
    let table = table_csv(&[("AAA", bars)]);
    let cfg = BacktestConfig {
        max_positions: 1,
        ..BacktestConfig::default()
    };
    let r = run_backtest(
        &table,
        StrategyKind::Enhanced,
        &SentimentBook::empty(),
        &cfg,
    )
    .unwrap();
    assert_eq!(r.trades.len(), 1);
    let t = &r.trades[0];
    assert_eq!(
        (t.entry_price, t.exit_price, t.quantity),
        (100.0, 110.0, 1000.0)
    );
    assert_eq!(t.pnl, 10_000.0);
    assert_eq!(r.final_equity(), 110_000.0);
}

#[test]
fn positive_momentum_without_exits_holds_continuously() {
    let bars: Vec<_> = (0..40)
        .map(|i| (100.0 + i as f64, 60.0, 50.0, 70.0, 60.0, 0.2, 1.0))
        .collect();
    let table = table_csv(&[("AAA", bars)]);
    let r = run_backtest(
        &table,
        StrategyKind::Enhanced,
        &SentimentBook::empty(),
        &BacktestConfig::default(),
    )
    .unwrap();
    let first = r
        .equity_curve
        .iter()
        .position(|p| p.open_positions == 1)
        .unwrap();
    assert!(r.equity_curve[first..]
        .iter()
        .all(|p| p.open_positions == 1));
    assert!(r.trades.is_empty());
}

fn check_accounting(r: &BacktestResult, initial: f64) {
    let mut cash = initial;
    let mut fills = r.fills.iter().peekable();
    for p in &r.equity_curve {
        while let Some(f) = fills.next_if(|f| f.date == p.date) {
            assert!(f.quantity > 0.0);
            match f.side {
                SignalAction::Buy => cash = (cash - f.notional).max(0.0),
                SignalAction::Sell => cash += f.notional,
            }
        }
        assert!(
            (cash - p.cash).abs() <= 1e-6,
            "{}: replayed cash {cash} vs {}",
            p.date,
            p.cash
        );
        assert!(p.cash >= 0.0);
        assert!((p.cash + p.positions_value - p.equity).abs() <= 1e-6);
        assert!(p.open_positions <= r.config.max_positions);
    }
    for t in &r.trades {
        assert_eq!(t.pnl, t.quantity * (t.exit_price - t.entry_price));
    }
}

#[test]
fn ledger_replays_to_reported_cash() {
    for seed in 0..4 {
        let u = common::universe(&common::small_config(40 + seed, 12));
        let book = SentimentBook::new(&u.data.sentiment, 100);
        for kind in [StrategyKind::Baseline, StrategyKind::Enhanced] {
            let cfg = BacktestConfig {
                max_positions: 4,
                cost_bps: 5.0 * seed as f64,
                ..BacktestConfig::default()
            };
            let r = run_backtest(&u.table, kind, &book, &cfg).unwrap();
            assert!(!r.trades.is_empty());
            check_accounting(&r, cfg.initial_capital);
        }
    }
}

#[test]
fn identical_inputs_identical_bytes() {
    let u = common::universe(&common::small_config(50, 8));
    let book = SentimentBook::new(&u.data.sentiment, 100);
    let a = run_backtest(
        &u.table,
        StrategyKind::Enhanced,
        &book,
        &BacktestConfig::default(),
    )
    .unwrap();
    let b = run_backtest(
        &u.table,
        StrategyKind::Enhanced,
        &book,
        &BacktestConfig::default(),
    )
    .unwrap();
    assert_eq!(equity_csv(&a), equity_csv(&b));
    assert_eq!(trades_csv(&a), trades_csv(&b));
    assert_eq!(
        csv_of(&a, |r, w| write_signals_csv(r, w)),
        csv_of(&b, |r, w| write_signals_csv(r, w))
    );
}

#[test]
fn truncated_runs_agree_with_full_run() {
    let u = common::universe(&common::small_config(60, 10));
    let book = SentimentBook::new(&u.data.sentiment, 100);
    let cal = u.table.calendar();
    for kind in [StrategyKind::Baseline, StrategyKind::Enhanced] {
        let full = run_backtest(&u.table, kind, &book, &BacktestConfig::default()).unwrap();
        for &cut in cal.iter().skip(300).step_by(97) {
            let past: Vec<SentimentRecord> = u
                .data
                .sentiment
                .iter()
                .filter(|s| s.date <= cut)
                .cloned()
                .collect();
            let part = run_backtest(
                &u.table.truncate_after(cut),
                kind,
                &SentimentBook::new(&past, 100),
                &BacktestConfig::default(),
            )
            .unwrap();
            let n = part.equity_curve.len();
            assert_eq!(part.equity_curve[..], full.equity_curve[..n]);
            let before = |d: Date| d <= cut;
            assert_eq!(
                part.signals
                    .iter()
                    .filter(|s| before(s.date))
                    .collect::<Vec<_>>(),
                full.signals
                    .iter()
                    .filter(|s| before(s.date))
                    .collect::<Vec<_>>()
            );
            assert_eq!(
                part.fills
                    .iter()
                    .filter(|f| before(f.date))
                    .collect::<Vec<_>>(),
                full.fills
                    .iter()
                    .filter(|f| before(f.date))
                    .collect::<Vec<_>>()
            );
            assert_eq!(
                part.trades
                    .iter()
                    .filter(|t| before(t.exit_date))
                    .collect::<Vec<_>>(),
                full.trades
                    .iter()
                    .filter(|t| before(t.exit_date))
                    .collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn empty_range_is_an_error() {
    let cfg = BacktestConfig {
        start: Date::from_ymd_opt(1990, 1, 1),
        end: Date::from_ymd_opt(1990, 12, 31),
        ..BacktestConfig::default()
    };
    assert!(run_backtest(
        &golden_table(),
        StrategyKind::Baseline,
        &SentimentBook::empty(),
        &cfg
    )
    .is_err());
}
