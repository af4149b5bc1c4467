//! Saves a checkpoint of a briefly trained network, loads it back and prints
//! the per-group sparsity. Pass a path to inspect an existing `.snnc` file.

use std::path::PathBuf;

use breg_snn::data::{DataConfig, DataSource, PatternTask};
use breg_snn::optim::Checkpoint;
use breg_snn::train::{run_training, TrainConfig};
use breg_snn::Result;

pub fn run(path: Option<PathBuf>) -> Result<()> {
    let path = match path {
        Some(p) => p,
        None => {
            let data = DataConfig {
                source: DataSource::Pattern(PatternTask {
                    samples_per_class: 10,
                    ..PatternTask::default()
                }),
                ..DataConfig::default()
            };
            let splits = data.splits()?;
            let mut cfg = TrainConfig::desk_default(40, 10);
            cfg.epochs = 2;
            cfg.lambda = 0.1;
            let report = run_training(&cfg, &splits)?;
            let path = std::env::temp_dir().join("breg-snn-example.snnc");
            report.final_checkpoint.save(&path)?;
            path
        }
    };
    let ck = Checkpoint::load(&path)?;
    println!("{}", path.display());
    print!("{}", ck.sparsity().to_table());
    for g in &ck.groups {
        println!(
            "{:<10} step {} λ {}",
            g.name,
            g.state.t,
            g.state.prox.effective_lambda()
        );
    }
    Ok(())
}

pub fn run_example() -> Result<()> {
    run(std::env::args().nth(1).map(PathBuf::from))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
