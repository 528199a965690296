use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use trendgate::indicators::{atr, ema, momentum, sma};
use trendgate::pipeline::{clean_loaded, read_prices};
use trendgate::strategy::{rank_top_n, RankCache};
use trendgate::synth::{generate, write_raw_csv, SynthConfig};
use trendgate::{
    build_analytics, run_backtest, BacktestConfig, CleanOptions, IndicatorParams, LoadOptions,
};
use trendgate::{SentimentBook, StrategyKind};
use trendgate_bench::universe;

fn indicators(c: &mut Criterion) {
    let (series, _) = universe(1, 4000);
    let bars = &series[0].bars;
    let closes = series[0].closes();
    let mut group = c.benchmark_group("indicators");
    group.throughput(Throughput::Elements(closes.len() as u64));
    group.bench_function("sma200", |b| b.iter(|| sma(black_box(&closes), 200)));
    group.bench_function("ema200", |b| b.iter(|| ema(black_box(&closes), 200)));
    group.bench_function("momentum63", |b| {
        b.iter(|| momentum(black_box(&closes), 63))
    });
    group.bench_function("atr14", |b| b.iter(|| atr(black_box(bars), 14)));
    group.finish();
}

fn cleaning(c: &mut Criterion) {
    let data = generate(&SynthConfig {
        tickers: 50,
        days: 2000,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut csv = Vec::new();
    write_raw_csv(&data.raw, &mut csv).unwrap();
    let mut group = c.benchmark_group("cleaning");
    group.sample_size(10);
    group.throughput(Throughput::Elements(data.planted.input_rows as u64));
    group.bench_function("load_and_clean", |b| {
        b.iter(|| {
            let loaded = read_prices(black_box(csv.as_slice()), &LoadOptions::default()).unwrap();
            clean_loaded(&loaded, &CleanOptions::default())
        })
    });
    group.finish();
}

fn analytics(c: &mut Criterion) {
    let (series, _) = universe(100, 2000);
    let rows: usize = series.iter().map(|s| s.len()).sum();
    let mut group = c.benchmark_group("analytics");
    group.sample_size(10);
    group.throughput(Throughput::Elements(rows as u64));
    group.bench_function("build_analytics", |b| {
        b.iter(|| build_analytics(black_box(&series), &IndicatorParams::default()))
    });
    group.finish();
}

fn backtest(c: &mut Criterion) {
    let (series, sentiment) = universe(100, 2000);
    let table = build_analytics(&series, &IndicatorParams::default()).unwrap();
    let book = SentimentBook::new(&sentiment, 100);
    let day = table.calendar()[1500];
    let mut group = c.benchmark_group("backtest");
    group.sample_size(10);
    group.bench_function("rank_top_n", |b| {
        b.iter(|| rank_top_n(black_box(&table), day, 10))
    });
    for kind in [StrategyKind::Baseline, StrategyKind::Enhanced] {
        group.bench_function(kind.name(), |b| {
            b.iter(|| run_backtest(black_box(&table), kind, &book, &BacktestConfig::default()))
        });
    }
    for (name, enabled) in [("ranking_cached", true), ("ranking_uncached", false)] {
        group.bench_function(name, |b| {
            b.iter_batched(
                || RankCache::new(enabled),
                |cache| {
                    for d in table.calendar().iter().step_by(5) {
                        cache.get_or_rank(&table, *d, 10).unwrap();
                        cache.get_or_rank(&table, *d, 10).unwrap();
                    }
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, indicators, cleaning, analytics, backtest);
criterion_main!(benches);
