use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::indicators::AnalyticsTable;
use crate::types::Date;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedTicker {
    pub ticker: String,
    pub momentum: f64,
}

/// Cross-sectional momentum ordering as of one date.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSnapshot {
    pub as_of: Date,
    pub n: usize,
    /// Descending momentum, ties by ascending ticker.
    pub ranked: Vec<RankedTicker>,
}

impl RankSnapshot {
    pub fn top_n(&self) -> &[RankedTicker] {
        &self.ranked[..self.n.min(self.ranked.len())]
    }

    pub fn in_top_n(&self, ticker: &str) -> bool {
        self.top_n().iter().any(|r| r.ticker == ticker)
    }

    /// 0-based position in the full ranking.
    pub fn rank_of(&self, ticker: &str) -> Option<usize> {
        self.ranked.iter().position(|r| r.ticker == ticker)
    }

    pub fn top_tickers(&self) -> Vec<&str> {
        self.top_n().iter().map(|r| r.ticker.as_str()).collect()
    }
}

/// Ranks every ticker by its latest defined momentum dated at or before `as_of`.
pub fn rank_top_n(table: &AnalyticsTable, as_of: Date, n: usize) -> Result<RankSnapshot> {
    if n == 0 {
        return Err(Error::arg("n must be >= 1"));
    }
    let mut ranked: Vec<RankedTicker> = table
        .frames()
        .iter()
        .filter_map(|f| {
            let last = f.as_of_index(as_of)?;
            (0..=last).rev().find_map(|i| {
                f.momentum63[i].map(|m| RankedTicker {
                    ticker: f.ticker.clone(),
                    momentum: m,
                })
            })
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.momentum
            .total_cmp(&a.momentum)
            .then_with(|| a.ticker.cmp(&b.ticker))
    });
    Ok(RankSnapshot { as_of, n, ranked })
}

/// Memoizes snapshots per (as_of, n). Concurrent readers; a single writer fills
/// each missing key.
#[derive(Debug)]
pub struct RankCache {
    enabled: bool,
    entries: RwLock<HashMap<(Date, usize), Arc<RankSnapshot>>>,
    rankings: AtomicUsize,
}

impl Default for RankCache {
    fn default() -> Self {
        Self::new(true)
    }
}

impl RankCache {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            entries: RwLock::new(HashMap::new()),
            rankings: AtomicUsize::new(0),
        }
    }

    pub fn get_or_rank(
        &self,
        table: &AnalyticsTable,
        as_of: Date,
        n: usize,
    ) -> Result<Arc<RankSnapshot>> {
        if !self.enabled {
            self.rankings.fetch_add(1, Ordering::Relaxed);
            return rank_top_n(table, as_of, n).map(Arc::new);
        }
        if let Some(hit) = self
            .entries
            .read()
            .expect("rank cache poisoned")
            .get(&(as_of, n))
        {
            return Ok(Arc::clone(hit));
        }
        let mut entries = self.entries.write().expect("rank cache poisoned");
        if let Some(hit) = entries.get(&(as_of, n)) {
            return Ok(Arc::clone(hit));
        }
        self.rankings.fetch_add(1, Ordering::Relaxed);
        let snap = Arc::new(rank_top_n(table, as_of, n)?);
        entries.insert((as_of, n), Arc::clone(&snap));
        Ok(snap)
    }

    /// Number of rankings actually computed.
    pub fn rankings_computed(&self) -> usize {
        self.rankings.load(Ordering::Relaxed)
    }

    pub fn clear(&self) {
        self.entries.write().expect("rank cache poisoned").clear();
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicators::TickerFrame;

    fn frame(ticker: &str, rows: &[(u32, Option<f64>)]) -> TickerFrame {
        let n = rows.len();
        TickerFrame {
            ticker: ticker.into(),
            dates: rows
                .iter()
                .map(|(d, _)| Date::from_ymd_opt(2024, 1, *d).unwrap())
                .collect(),
            open: vec![1.0; n],
            high: vec![1.0; n],
            low: vec![1.0; n],
            close: vec![1.0; n],
            volume: vec![0.0; n],
            ma50: vec![None; n],
            ma200: vec![None; n],
            ema50: vec![None; n],
            ema200: vec![None; n],
            momentum63: rows.iter().map(|(_, m)| *m).collect(),
            atr14: vec![None; n],
            fwd_return_21: vec![None; n],
        }
    }

    fn day(d: u32) -> Date {
        Date::from_ymd_opt(2024, 1, d).unwrap()
    }

    #[test]
    fn order_statistics() {
        let t = AnalyticsTable::from_frames(vec![
            frame("A", &[(5, Some(0.3))]),
            frame("B", &[(5, Some(0.1))]),
            frame("C", &[(5, Some(0.2))]),
        ])
        .unwrap();
        let s = rank_top_n(&t, day(5), 2).unwrap();
        assert_eq!(s.top_tickers(), vec!["A", "C"]);
        assert!(!s.in_top_n("B"));
    }

    #[test]
    fn ties_break_by_symbol() {
        let t = AnalyticsTable::from_frames(vec![
            frame("B", &[(5, Some(0.2))]),
            frame("A", &[(5, Some(0.2))]),
        ])
        .unwrap();
        assert_eq!(rank_top_n(&t, day(5), 1).unwrap().top_tickers(), vec!["A"]);
    }

    #[test]
    fn as_of_uses_earlier_row() {
        let t = AnalyticsTable::from_frames(vec![
            frame("A", &[(3, Some(0.5)), (10, Some(-0.5))]),
            frame("B", &[(3, Some(0.1))]),
        ])
        .unwrap();
        let s = rank_top_n(&t, day(7), 1).unwrap();
        assert_eq!(s.top_tickers(), vec!["A"]);
        assert_eq!(s.ranked[0].momentum, 0.5);
        let s = rank_top_n(&t, day(10), 1).unwrap();
        assert_eq!(s.top_tickers(), vec!["B"]);
    }

    #[test]
    fn undefined_momentum_is_skipped() {
        let t = AnalyticsTable::from_frames(vec![frame("A", &[(3, None), (4, None)])]).unwrap();
        let s = rank_top_n(&t, day(5), 3).unwrap();
        assert!(s.ranked.is_empty());
        assert!(rank_top_n(&t, day(5), 0).is_err());
    }

    #[test]
    fn cache_returns_same_object() {
        let t = AnalyticsTable::from_frames(vec![frame("A", &[(3, Some(0.5))])]).unwrap();
        let cache = RankCache::new(true);
        let a = cache.get_or_rank(&t, day(3), 10).unwrap();
        let b = cache.get_or_rank(&t, day(3), 10).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.rankings_computed(), 1);
        cache.clear();
        let c = cache.get_or_rank(&t, day(3), 10).unwrap();
        assert_eq!(*a, *c);
        assert_eq!(cache.rankings_computed(), 2);

        let off = RankCache::new(false);
        off.get_or_rank(&t, day(3), 10).unwrap();
        off.get_or_rank(&t, day(3), 10).unwrap();
        assert_eq!(off.rankings_computed(), 2);
    }
}
