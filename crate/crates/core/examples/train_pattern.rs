//! Trains the default 40 → 64 → 64 (recurrent) → 10 network on the pattern
//! task with AdaBreg and reports accuracy and sparsity.
//!
//! ```text
//! cargo run --release --example train_pattern -- [epochs] [lambda]
//! ```

use breg_snn::data::DataConfig;
use breg_snn::train::{run_training_with, TrainConfig};
use breg_snn::Result;

pub fn run(epochs: usize, lambda: f64) -> Result<()> {
    let splits = DataConfig::default().splits()?;
    let mut cfg = TrainConfig::desk_default(splits.train.channels, splits.train.num_classes);
    cfg.epochs = epochs;
    cfg.lambda = lambda;
    let report = run_training_with(&cfg, &splits, &mut |log| {
        println!(
            "epoch {:>3} {:<5} loss {:.4} acc {:.3} non-zero {:.3} lr {:.2e}",
            log.epoch,
            log.split.as_str(),
            log.loss,
            log.accuracy,
            log.nonzero_fraction,
            log.lr
        );
        Ok(())
    })?;
    println!("dense init non-zeros {}", report.dense_init_nonzero);
    print!("{}", report.final_report.to_table());
    if let Some(test) = report.test {
        println!("test accuracy {:.3}", test.accuracy);
    }
    Ok(())
}

pub fn run_example() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let lambda = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.12);
    run(epochs, lambda)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
