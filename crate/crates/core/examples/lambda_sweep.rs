//! Sweeps the l1 strength λ over a grid with several seeds and prints the
//! per-λ means: larger λ gives sparser networks until accuracy collapses.
//!
//! ```text
//! BREG_SNN_THREADS=4 cargo run --release --example lambda_sweep -- [epochs]
//! ```

use breg_snn::data::DataConfig;
use breg_snn::train::{lambda_sweep, sweep_threads, TrainConfig};
use breg_snn::Result;

pub fn run(epochs: usize, lambdas: &[f64], repeats: usize) -> Result<()> {
    let splits = DataConfig::default().splits()?;
    let mut cfg = TrainConfig::desk_default(splits.train.channels, splits.train.num_classes);
    cfg.epochs = epochs;
    let result = lambda_sweep(&cfg, &splits, lambdas, repeats, sweep_threads())?;
    print!("{}", result.aggregate_csv());
    Ok(())
}

pub fn run_example() -> Result<()> {
    let epochs = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(30);
    run(epochs, &[0.0, 0.03, 0.06, 0.12, 0.5], 2)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
