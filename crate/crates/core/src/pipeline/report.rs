use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// Audit trail of every row the cleaning steps removed or repaired.
///
/// Conservation: `input_rows == output_rows + rows_removed()`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub input_rows: usize,
    pub output_rows: usize,
    pub duplicates_removed: usize,
    pub rows_forward_filled: usize,
    /// Rows with an unusable date or ticker, plus rows still missing a price after filling.
    pub rows_dropped_missing: usize,
    /// Rows whose filled prices break the OHLC ordering.
    pub rows_dropped_invalid: usize,
    pub tickers_dropped_short_history: usize,
    pub rows_dropped_short_history: usize,
    pub rows_dropped_outlier: usize,
    pub transcripts_input: usize,
    pub transcripts_output: usize,
    pub transcripts_dropped: usize,
}

impl CleaningReport {
    pub fn rows_removed(&self) -> usize {
        self.duplicates_removed
            + self.rows_dropped_missing
            + self.rows_dropped_invalid
            + self.rows_dropped_short_history
            + self.rows_dropped_outlier
    }

    pub fn is_conserved(&self) -> bool {
        self.input_rows == self.output_rows + self.rows_removed()
            && self.transcripts_input == self.transcripts_output + self.transcripts_dropped
    }
}

impl AddAssign for CleaningReport {
    fn add_assign(&mut self, o: Self) {
        self.input_rows += o.input_rows;
        self.output_rows += o.output_rows;
        self.duplicates_removed += o.duplicates_removed;
        self.rows_forward_filled += o.rows_forward_filled;
        self.rows_dropped_missing += o.rows_dropped_missing;
        self.rows_dropped_invalid += o.rows_dropped_invalid;
        self.tickers_dropped_short_history += o.tickers_dropped_short_history;
        self.rows_dropped_short_history += o.rows_dropped_short_history;
        self.rows_dropped_outlier += o.rows_dropped_outlier;
        self.transcripts_input += o.transcripts_input;
        self.transcripts_output += o.transcripts_output;
        self.transcripts_dropped += o.transcripts_dropped;
    }
}

impl std::iter::Sum for CleaningReport {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut acc, r| {
            acc += r;
            acc
        })
    }
}
