mod common;

use common::{oracles, rel_close};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trendgate::analytics::{
    annualized_volatility, daily_returns, decile_analysis, max_drawdown, pearson, sharpe,
    total_return, win_rate,
};
use trendgate::backtest::{ExitReason, Trade};
use trendgate::{Date, Error};

fn curve(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(3..400);
    let mut v = 1000.0 * rng.random::<f64>() + 1.0;
    (0..n)
        .map(|_| {
            v *= 1.0 + rng.random_range(-0.05..0.05);
            v
        })
        .collect()
}

fn trades(pnl: &[f64]) -> Vec<Trade> {
    let d = Date::from_ymd_opt(2020, 1, 1).unwrap();
    pnl.iter()
        .map(|&p| Trade {
            ticker: "X".into(),
            entry_date: d,
            entry_price: 10.0,
            exit_date: d,
            exit_price: 10.0 + p,
            quantity: 1.0,
            pnl: p,
            exit_reason: ExitReason::TrendExit,
        })
        .collect()
}

#[test]
fn metrics_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let eq = curve(&mut rng);
        let r = daily_returns(&eq).unwrap();
        let want_r = oracles::returns(&eq);
        assert!(r.iter().zip(&want_r).all(|(a, b)| rel_close(*a, *b, 1e-9)));
        assert!(rel_close(
            total_return(&eq).unwrap(),
            oracles::total_return(&eq),
            1e-9
        ));
        assert!(rel_close(
            sharpe(&r, 252, 0.0).unwrap(),
            oracles::sharpe(&want_r),
            1e-9
        ));
        assert!(rel_close(
            annualized_volatility(&r, 252).unwrap(),
            oracles::volatility(&want_r),
            1e-9
        ));
        assert!(rel_close(
            max_drawdown(&eq).unwrap().0,
            oracles::max_drawdown(&eq),
            1e-9
        ));
        let pnl: Vec<f64> = (0..rng.random_range(1..50))
            .map(|_| rng.random_range(-5.0..5.0))
            .collect();
        assert!(rel_close(
            win_rate(&trades(&pnl)).unwrap(),
            oracles::win_rate(&pnl),
            1e-9
        ));
        let y: Vec<f64> = eq.iter().map(|v| v.sqrt() + rng.random::<f64>()).collect();
        assert!(rel_close(
            pearson(&eq, &y).unwrap(),
            oracles::pearson(&eq, &y),
            1e-9
        ));
    }
}

#[test]
fn boundary_cases() {
    assert_eq!(max_drawdown(&[100.0, 120.0, 90.0, 130.0]).unwrap().0, -0.25);
    assert!(matches!(
        sharpe(&[0.01; 30], 252, 0.0),
        Err(Error::ZeroVolatility)
    ));
    assert!(matches!(win_rate(&[]), Err(Error::NoTrades)));
}

proptest! {
    #[test]
    fn drawdown_nonpositive_and_zero_iff_running_max(eq in prop::collection::vec(0.1f64..1e6, 1..200)) {
        let (dd, series) = max_drawdown(&eq).unwrap();
        prop_assert!(dd <= 0.0);
        prop_assert!(series.iter().all(|d| *d <= 0.0));
        let monotone = eq.windows(2).all(|w| w[1] >= w[0]);
        prop_assert_eq!(dd == 0.0, monotone);
    }

    #[test]
    fn scale_free_metrics(eq in prop::collection::vec(1.0f64..1e4, 3..100), k in 0.01f64..100.0) {
        let eq_k: Vec<f64> = eq.iter().map(|v| v * k).collect();
        prop_assert!(rel_close(total_return(&eq).unwrap(), total_return(&eq_k).unwrap(), 1e-9));
        let (r, rk) = (daily_returns(&eq).unwrap(), daily_returns(&eq_k).unwrap());
        prop_assert!(rel_close(annualized_volatility(&r, 252).unwrap(), annualized_volatility(&rk, 252).unwrap(), 1e-9));
        if let (Ok(a), Ok(b)) = (sharpe(&r, 252, 0.0), sharpe(&rk, 252, 0.0)) {
            prop_assert!(rel_close(a, b, 1e-6));
        }
    }

    #[test]
    fn pearson_affine_invariant(
        xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..80),
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        if let (Ok(p), Ok(q)) = (pearson(&x, &y), pearson(&xt, &y)) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn deciles_invariant_under_increasing_transform(
        xy in prop::collection::vec((-10.0f64..10.0, -1.0f64..1.0), 10..200),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let xt: Vec<f64> = x.iter().map(|v| v.exp() * 3.0 + 1.0).collect();
        let a = decile_analysis(&x, &y, 10).unwrap();
        let b = decile_analysis(&xt, &y, 10).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            prop_assert_eq!(ra.count, rb.count);
            prop_assert_eq!(ra.mean_forward_return, rb.mean_forward_return);
        }
    }
}
