use std::path::PathBuf;

use chrono::NaiveDate;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("{bad} of {total} rows have unparseable dates (allowed fraction {allowed})")]
    TooManyBadDates {
        bad: usize,
        total: usize,
        allowed: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("zero volatility")]
    ZeroVolatility,

    #[error("no trades")]
    NoTrades,

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("no data in range {start:?}..={end:?}")]
    NoDataInRange {
        start: Option<NaiveDate>,
        end: Option<NaiveDate>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches the file a failure came from.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
