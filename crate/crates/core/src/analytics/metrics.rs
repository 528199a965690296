use serde::{Deserialize, Serialize};

use crate::backtest::Trade;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConventions {
    pub periods_per_year: u32,
    /// Annual risk-free rate, de-annualized per period.
    pub risk_free: f64,
}

impl Default for MetricConventions {
    fn default() -> Self {
        Self {
            periods_per_year: 252,
            risk_free: 0.0,
        }
    }
}

/// The five headline evaluation metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub total_return: f64,
    /// `None` when returns have zero variance.
    pub sharpe: Option<f64>,
    pub max_drawdown: f64,
    /// `None` when no trade closed.
    pub win_rate: Option<f64>,
    pub volatility: f64,
}

pub fn total_return(equity: &[f64]) -> Result<f64> {
    match equity {
        [first, .., last] if *first > 0.0 => Ok(last / first - 1.0),
        [_, _, ..] => Err(Error::Degenerate(
            "first equity value must be positive".into(),
        )),
        _ => Err(Error::Degenerate("need at least 2 equity points".into())),
    }
}

pub fn daily_returns(equity: &[f64]) -> Result<Vec<f64>> {
    if equity.len() < 2 {
        return Err(Error::Degenerate("need at least 2 equity points".into()));
    }
    if let Some(bad) = equity.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(Error::Degenerate(format!(
            "non-positive equity point {bad}"
        )));
    }
    Ok(equity.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n − 1) standard deviation; exactly zero for constant input.
fn sample_std(xs: &[f64]) -> f64 {
    if xs.iter().all(|x| *x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Annualized Sharpe ratio of periodic returns.
pub fn sharpe(returns: &[f64], periods_per_year: u32, risk_free: f64) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::Degenerate("need at least 2 returns".into()));
    }
    let sd = sample_std(returns);
    if sd == 0.0 {
        return Err(Error::ZeroVolatility);
    }
    let periods = f64::from(periods_per_year);
    Ok((mean(returns) - risk_free / periods) / sd * periods.sqrt())
}

pub fn annualized_volatility(returns: &[f64], periods_per_year: u32) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::Degenerate("need at least 2 returns".into()));
    }
    Ok(sample_std(returns) * f64::from(periods_per_year).sqrt())
}

/// `equity[i] / max(equity[..=i]) - 1` for every point.
pub fn drawdown_series(equity: &[f64]) -> Vec<f64> {
    let mut peak = f64::NEG_INFINITY;
    equity
        .iter()
        .map(|&v| {
            peak = peak.max(v);
            v / peak - 1.0
        })
        .collect()
}

/// Worst drawdown (≤ 0) and the full drawdown series.
pub fn max_drawdown(equity: &[f64]) -> Result<(f64, Vec<f64>)> {
    if equity.is_empty() {
        return Err(Error::Degenerate("empty equity curve".into()));
    }
    let series = drawdown_series(equity);
    let worst = series.iter().copied().fold(0.0_f64, f64::min);
    Ok((worst, series))
}

/// Fraction of closed trades with strictly positive pnl.
pub fn win_rate(trades: &[Trade]) -> Result<f64> {
    if trades.is_empty() {
        return Err(Error::NoTrades);
    }
    let wins = trades.iter().filter(|t| t.pnl > 0.0).count();
    Ok(wins as f64 / trades.len() as f64)
}

/// Pearson correlation over pairs where both members are defined.
pub fn pearson_correlation(x: &[Option<f64>], y: &[Option<f64>]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::arg(format!(
            "length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some((*a)?).zip(*b))
        .unzip();
    pearson(&xs, &ys)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::arg(format!(
            "length mismatch {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Degenerate("need at least 2 defined pairs".into()));
    }
    if sample_std(xs) == 0.0 || sample_std(ys) == 0.0 {
        return Err(Error::ZeroVolatility);
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in xs.iter().zip(ys) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn compute_metrics(
    equity: &[f64],
    trades: &[Trade],
    conv: &MetricConventions,
) -> Result<MetricsSummary> {
    let returns = daily_returns(equity)?;
    let sharpe = match sharpe(&returns, conv.periods_per_year, conv.risk_free) {
        Ok(s) => Some(s),
        Err(Error::ZeroVolatility | Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    let volatility = if returns.len() >= 2 {
        annualized_volatility(&returns, conv.periods_per_year)?
    } else {
        0.0
    };
    Ok(MetricsSummary {
        total_return: total_return(equity)?,
        sharpe,
        max_drawdown: max_drawdown(equity)?.0,
        win_rate: win_rate(trades).ok(),
        volatility,
    })
}
