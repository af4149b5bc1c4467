//! Drives a run from a TOML configuration, the same file format the
//! `breg-snn train` command reads.

use breg_snn::cli::RunConfig;
use breg_snn::train::run_training;
use breg_snn::Result;

const CONFIG: &str = r#"
[data]
seed = 3
source = { kind = "pattern", classes = 4, timesteps = 30, channels = 16, samples_per_class = 30 }

[network]
layers = [
  { kind = "recurrent", size = 32, lif = { beta = 0.95 } },
  { kind = "readout", size = 4 },
]

[train]
epochs = 8
batch_size = 16
lambda = 0.05
optimizer = { algorithm = "adabreg", lr = 1e-2 }
schedule = { kind = "constant" }
"#;

pub fn run_example() -> Result<()> {
    let cfg = RunConfig::from_toml(CONFIG)?;
    let splits = cfg.data.splits()?;
    let train = cfg.train_config(splits.train.channels, splits.train.num_classes)?;
    let report = run_training(&train, &splits)?;
    for log in report.val_logs() {
        println!(
            "epoch {} val acc {:.3} non-zero {:.3}",
            log.epoch, log.accuracy, log.nonzero_fraction
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
