use chrono::Datelike;

use crate::types::{PriceBar, PriceSeries};

/// Collapses daily bars into one bar per ISO week, dated on the week's last trading day.
pub fn compress_to_weekly(series: &PriceSeries) -> PriceSeries {
    let mut out: Vec<PriceBar> = Vec::new();
    let mut current_week = None;
    for bar in &series.bars {
        let week = bar.date.iso_week();
        let key = (week.year(), week.week());
        match out.last_mut() {
            Some(w) if current_week == Some(key) => {
                w.date = bar.date;
                w.close = bar.close;
                w.high = w.high.max(bar.high);
                w.low = w.low.min(bar.low);
                w.volume += bar.volume;
            }
            _ => {
                current_week = Some(key);
                out.push(*bar);
            }
        }
    }
    PriceSeries::new(series.ticker.clone(), out)
}
