use chrono::{Datelike, Weekday};

use crate::types::Date;

/// Whether `day` closes its trading week.
///
/// A Friday always does; any other day does when the next trading day falls in a
/// later ISO week. Only the next date on the trading calendar is consulted, never
/// prices, so a run truncated at `day` agrees with the full run on every earlier day.
pub fn is_week_end(day: Date, next_trading_day: Option<Date>) -> bool {
    if day.weekday() == Weekday::Fri {
        return true;
    }
    match next_trading_day {
        Some(next) => next.iso_week() != day.iso_week(),
        None => false,
    }
}

/// Weekly evaluation dates drawn from an ascending trading calendar.
pub fn evaluation_dates(calendar: &[Date]) -> Vec<Date> {
    calendar
        .iter()
        .enumerate()
        .filter(|(i, d)| is_week_end(**d, calendar.get(i + 1).copied()))
        .map(|(_, d)| *d)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: u32, day: u32) -> Date {
        Date::from_ymd_opt(2024, m, day).unwrap()
    }

    #[test]
    fn friday_and_short_weeks() {
        // Mon 8 .. Fri 12, then Mon 15 .. Wed 17 (holiday Thu/Fri), Mon 22
        let cal = [
            d(1, 8),
            d(1, 9),
            d(1, 10),
            d(1, 11),
            d(1, 12),
            d(1, 15),
            d(1, 16),
            d(1, 17),
            d(1, 22),
        ];
        assert_eq!(evaluation_dates(&cal), vec![d(1, 12), d(1, 17)]);
    }

    #[test]
    fn trailing_partial_week_is_not_evaluated() {
        let cal = [d(1, 8), d(1, 9), d(1, 10)];
        assert!(evaluation_dates(&cal).is_empty());
    }
}
