//! Naive reference implementations, written independently of the library.

use std::collections::{BTreeMap, HashMap};

use chrono::Datelike;
use trendgate::indicators::AnalyticsTable;
use trendgate::Date;

pub fn sma(x: &[f64], w: usize) -> Vec<Option<f64>> {
    (0..x.len())
        .map(|i| {
            if i + 1 < w {
                return None;
            }
            let mut s = 0.0;
            for v in &x[i + 1 - w..=i] {
                s += v;
            }
            Some(s / w as f64)
        })
        .collect()
}

pub fn ema(x: &[f64], span: usize) -> Vec<Option<f64>> {
    let alpha = 2.0 / (span as f64 + 1.0);
    let mut out = vec![None; x.len()];
    if x.len() < span {
        return out;
    }
    let mut prev = x[..span].iter().sum::<f64>() / span as f64;
    out[span - 1] = Some(prev);
    for i in span..x.len() {
        prev = alpha * x[i] + (1.0 - alpha) * prev;
        out[i] = Some(prev);
    }
    out
}

pub fn momentum(x: &[f64], l: usize) -> Vec<Option<f64>> {
    (0..x.len())
        .map(|i| (i >= l).then(|| x[i] / x[i - l] - 1.0))
        .collect()
}

pub fn forward(x: &[f64], h: usize) -> Vec<Option<f64>> {
    (0..x.len())
        .map(|i| (i + h < x.len()).then(|| x[i + h] / x[i] - 1.0))
        .collect()
}

pub fn true_range(high: &[f64], low: &[f64], close: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(high.len());
    for i in 0..high.len() {
        let hl = high[i] - low[i];
        if i == 0 {
            out.push(hl);
        } else {
            let a = (high[i] - close[i - 1]).abs();
            let b = (low[i] - close[i - 1]).abs();
            out.push(hl.max(a).max(b));
        }
    }
    out
}

pub fn atr(high: &[f64], low: &[f64], close: &[f64], period: usize) -> Vec<Option<f64>> {
    if high.len() < 2 {
        return vec![None; high.len()];
    }
    ema(&true_range(high, low, close), period)
}

pub fn total_return(eq: &[f64]) -> f64 {
    eq[eq.len() - 1] / eq[0] - 1.0
}

pub fn returns(eq: &[f64]) -> Vec<f64> {
    let mut r = Vec::new();
    for i in 1..eq.len() {
        r.push((eq[i] - eq[i - 1]) / eq[i - 1]);
    }
    r
}

/// Two-pass sample standard deviation.
pub fn stdev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let mut ss = 0.0;
    for v in x {
        ss += (v - m).powi(2);
    }
    (ss / (n - 1.0)).sqrt()
}

pub fn sharpe(r: &[f64]) -> f64 {
    let m = r.iter().sum::<f64>() / r.len() as f64;
    m / stdev(r) * 252f64.sqrt()
}

pub fn volatility(r: &[f64]) -> f64 {
    stdev(r) * 252f64.sqrt()
}

/// Worst peak-to-trough decline, checking every (peak, trough) pair.
pub fn max_drawdown(eq: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..eq.len() {
        for i in 0..=j {
            worst = worst.min(eq[j] / eq[i] - 1.0);
        }
    }
    worst
}

pub fn win_rate(pnl: &[f64]) -> f64 {
    pnl.iter().filter(|p| **p > 0.0).count() as f64 / pnl.len() as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let (mx, my) = (sx / n, sy / n);
    let cov: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (n - 1.0);
    cov / (stdev(x) * stdev(y))
}

/// One output line per trade and per day, formatted like the committed golden files.
pub struct RefLedger {
    pub equity_csv: String,
    pub trades_csv: String,
    pub equity: Vec<f64>,
    pub cash: Vec<f64>,
}

#[derive(Clone)]
struct RefPos {
    entry_date: Date,
    entry_price: f64,
    qty: f64,
    high: f64,
}

/// Straight-line simulator for the enhanced strategy with neutral sentiment, zero
/// costs and as-of ranking. Written for clarity, not speed.
pub fn reference_enhanced(
    table: &AnalyticsTable,
    capital: f64,
    max_pos: usize,
    top_n: usize,
    atr_mult: f64,
    delist_after: usize,
) -> RefLedger {
    let mut by_key: HashMap<(String, Date), usize> = HashMap::new();
    let mut tickers: Vec<String> = Vec::new();
    for f in table.frames() {
        tickers.push(f.ticker.clone());
        for (i, d) in f.dates.iter().enumerate() {
            by_key.insert((f.ticker.clone(), *d), i);
        }
    }
    let frame = |t: &str| table.frame(t).unwrap();
    let days = table.calendar();

    let mut cash = capital;
    let mut pos: BTreeMap<String, RefPos> = BTreeMap::new();
    let mut sells: Vec<(String, &'static str)> = Vec::new();
    let mut buys: Vec<(usize, String)> = Vec::new();
    let mut last_seen: HashMap<String, (usize, usize)> = HashMap::new();
    let mut trades = String::from(
        "ticker,entry_date,entry_price,exit_date,exit_price,quantity,pnl,exit_reason\n",
    );
    let mut equity_csv = String::from("date,equity,drawdown\n");
    let (mut eqs, mut cashes) = (Vec::new(), Vec::new());
    let mut peak = f64::NEG_INFINITY;

    for (k, day) in days.iter().enumerate() {
        let row_today = |t: &str| by_key.get(&(t.to_string(), *day)).copied();
        for t in &tickers {
            if let Some(i) = row_today(t) {
                last_seen.insert(t.clone(), (k, i));
            }
        }

        let mut carry = Vec::new();
        for (t, why) in std::mem::take(&mut sells) {
            match row_today(&t) {
                None => carry.push((t, why)),
                Some(i) => {
                    if let Some(p) = pos.remove(&t) {
                        let px = frame(&t).open[i];
                        cash += p.qty * px;
                        trades += &trade_line(&t, &p, *day, px, why);
                    }
                }
            }
        }
        sells = carry;

        buys.sort();
        for (_, t) in std::mem::take(&mut buys) {
            let Some(i) = row_today(&t) else { continue };
            if pos.contains_key(&t) || pos.len() >= max_pos {
                continue;
            }
            let mut held_value = 0.0;
            for (ht, p) in &pos {
                let f = frame(ht);
                let px = match row_today(ht) {
                    Some(j) => f.open[j],
                    None => f.close[last_seen[ht].1],
                };
                held_value += p.qty * px;
            }
            let eq = cash + held_value;
            let alloc = (eq / max_pos as f64).min(cash);
            if alloc <= 0.0 {
                continue;
            }
            let f = frame(&t);
            let px = f.open[i];
            cash = (cash - alloc).max(0.0);
            pos.insert(
                t.clone(),
                RefPos {
                    entry_date: *day,
                    entry_price: px,
                    qty: alloc / px,
                    high: f.close[i],
                },
            );
        }

        let held: Vec<String> = pos.keys().cloned().collect();
        for t in held {
            if row_today(&t).is_none() && k - last_seen[&t].0 >= delist_after {
                let p = pos.remove(&t).unwrap();
                let px = frame(&t).open[last_seen[&t].1];
                cash += p.qty * px;
                trades += &trade_line(&t, &p, *day, px, "delisted");
                sells.retain(|(s, _)| *s != t);
            }
        }

        for (t, p) in pos.iter_mut() {
            let Some(i) = row_today(t) else { continue };
            let f = frame(t);
            p.high = p.high.max(f.close[i]);
            if sells.iter().any(|(s, _)| s == t) {
                continue;
            }
            let c = f.close[i];
            if let Some(ma) = f.ma200[i] {
                if c < ma {
                    sells.push((t.clone(), "regime_break"));
                    continue;
                }
            }
            if let Some(a) = f.atr14[i] {
                if c < p.high - atr_mult * a {
                    sells.push((t.clone(), "atr_stop"));
                }
            }
        }

        let week_end = day.weekday() == chrono::Weekday::Fri
            || days
                .get(k + 1)
                .is_some_and(|n| n.iso_week() != day.iso_week());
        if week_end {
            let mut moms: Vec<(f64, String)> = Vec::new();
            for t in &tickers {
                let f = frame(t);
                let latest = f.dates.iter().rposition(|d| d <= day);
                if let Some(m) = latest.and_then(|l| (0..=l).rev().find_map(|i| f.momentum63[i])) {
                    moms.push((m, t.clone()));
                }
            }
            moms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            let top: Vec<&String> = moms.iter().take(top_n).map(|(_, t)| t).collect();
            for t in &tickers {
                let Some(i) = row_today(t) else { continue };
                if pos.contains_key(t) || sells.iter().any(|(s, _)| s == t) {
                    continue;
                }
                let f = frame(t);
                let c = f.close[i];
                let ok = f.ma200[i].is_some_and(|m| c > m)
                    && matches!((f.ema50[i], f.ema200[i]), (Some(a), Some(b)) if a > b && c > a)
                    && f.momentum63[i].is_some_and(|m| m > 0.0);
                if let (true, Some(rank)) = (ok, top.iter().position(|x| *x == t)) {
                    buys.push((rank, t.clone()));
                }
            }
        }

        let mut held_value = 0.0;
        for (t, p) in &pos {
            held_value += p.qty * frame(t).close[last_seen[t].1];
        }
        let eq = cash + held_value;
        peak = peak.max(eq);
        equity_csv += &format!("{},{},{}\n", day, eq, eq / peak - 1.0);
        eqs.push(eq);
        cashes.push(cash);
    }
    RefLedger {
        equity_csv,
        trades_csv: trades,
        equity: eqs,
        cash: cashes,
    }
}

fn trade_line(t: &str, p: &RefPos, exit: Date, px: f64, why: &str) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        t,
        p.entry_date,
        p.entry_price,
        exit,
        px,
        p.qty,
        p.qty * (px - p.entry_price),
        why
    )
}
