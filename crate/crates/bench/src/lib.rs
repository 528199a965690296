//! Shared inputs for the criterion benchmarks in `benches/`.

use trendgate::pipeline::clean_universe;
use trendgate::synth::{generate, SynthConfig};
use trendgate::{CleanOptions, PriceSeries, SentimentRecord};

/// A defect-free synthetic universe and its planted sentiment labels.
pub fn universe(tickers: usize, days: usize) -> (Vec<PriceSeries>, Vec<SentimentRecord>) {
    let cfg = SynthConfig {
        tickers,
        days,
        ..SynthConfig::default()
    }
    .clean();
    let data = generate(&cfg).expect("valid synth config");
    let (series, _) = clean_universe(&data.raw, &CleanOptions::default());
    (series, data.sentiment)
}
