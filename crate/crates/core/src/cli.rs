//! `breg-snn` command line: `gen-data | train | eval | sweep | inspect`.
//!
//! Exit codes: 0 success, 1 I/O or file-format failure, 2 usage or config
//! error, 3 training divergence.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{DataConfig, DataSource, GlyphTask, PatternTask, SpikeDataset, Splits};
use crate::error::{Error, Result};
use crate::optim::{Algorithm, Checkpoint, OptimConfig, ScheduleKind};
use crate::snn::{LayerKind, LayerSpec, LifParams, Network, NetworkSpec};
use crate::train::{
    evaluate, lambda_sweep, metrics_csv, run_training_with, sweep_threads, EpochLog,
    ScheduleConfig, TrainConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

/// Maps an error onto the exit-code contract.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        Error::Divergence { .. } => EXIT_DIVERGED,
        Error::Shape(_) | Error::InvalidArgument(_) | Error::Config(_) => EXIT_USAGE,
    }
}

/// One layer entry of the `[network]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub kind: LayerKind,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lif: Option<LifParams>,
}

/// Layer stack; the input width comes from the dataset. Empty means the
/// desk default `64 → 64 (recurrent) → classes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default)]
    pub layers: Vec<LayerConfig>,
}

impl NetworkConfig {
    pub fn spec(&self, inputs: usize, classes: usize) -> Result<NetworkSpec> {
        if self.layers.is_empty() {
            return Ok(NetworkSpec::desk_default(inputs, classes));
        }
        let mut in_dim = inputs;
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let spec = match l.kind {
                LayerKind::FeedforwardLif => LayerSpec::feedforward(in_dim, l.size),
                LayerKind::RecurrentLif => LayerSpec::recurrent(in_dim, l.size),
                LayerKind::LinearReadout => LayerSpec::readout(in_dim, l.size),
            };
            layers.push(match l.lif {
                Some(p) => spec.with_lif(p),
                None => spec,
            });
            in_dim = l.size;
        }
        NetworkSpec::new(layers)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "TrainSection::default_epochs")]
    pub epochs: usize,
    #[serde(default = "TrainSection::default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "TrainSection::default_optimizer")]
    pub optimizer: OptimConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
}

impl TrainSection {
    fn default_epochs() -> usize {
        100
    }
    fn default_batch_size() -> usize {
        32
    }
    fn default_optimizer() -> OptimConfig {
        OptimConfig::new(Algorithm::AdaBreg, 5e-3)
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            epochs: Self::default_epochs(),
            batch_size: Self::default_batch_size(),
            lambda: 0.0,
            seed: 0,
            optimizer: Self::default_optimizer(),
            schedule: ScheduleConfig::default(),
        }
    }
}

/// Run configuration file (TOML). Unknown keys are rejected.
///
/// ```toml
/// output_dir = "runs/pattern"
///
/// [data]
/// seed = 0
/// bin = 1
/// split = [0.6, 0.2, 0.2]
/// source = { kind = "pattern", classes = 10, timesteps = 50, channels = 40 }
/// # source = { kind = "file", path = "data.spk1" }
///
/// [network]   # omit for 64 → 64 (recurrent) → classes
/// layers = [
///   { kind = "feedforward", size = 64 },
///   { kind = "recurrent", size = 64 },
///   { kind = "readout", size = 10 },
/// ]
///
/// [train]
/// epochs = 100
/// batch_size = 32
/// lambda = 0.12
/// seed = 0
/// optimizer = { algorithm = "adabreg", lr = 5e-3 }
/// schedule = { kind = "one-cycle", pct_start = 0.3 }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "RunConfig::default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub train: TrainSection,
}

impl RunConfig {
    fn default_output_dir() -> PathBuf {
        PathBuf::from("runs")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Builds the training config for a dataset with the given shape.
    pub fn train_config(&self, inputs: usize, classes: usize) -> Result<TrainConfig> {
        let t = &self.train;
        let cfg = TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            optimizer: t.optimizer.clone(),
            lambda: t.lambda,
            schedule: t.schedule.clone(),
            seed: t.seed,
            network: self.network.spec(inputs, classes)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: Self::default_output_dir(),
            data: DataConfig::default(),
            network: NetworkConfig::default(),
            train: TrainSection::default(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "breg-snn",
    version,
    about = "Sparse SNN training with linearized Bregman iterations (LinBreg / AdaBreg)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset in SPK1 format.
    GenData(GenDataArgs),
    /// Train one network and write metrics, checkpoints and a sparsity report.
    Train(TrainArgs),
    /// Evaluate a checkpoint on one split of the configured dataset.
    Eval(EvalArgs),
    /// Train over a grid of λ values and seeds.
    Sweep(SweepArgs),
    /// Print per-group sparsity of a checkpoint.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Task {
    /// Spectro-temporal rate patterns with Poisson counts.
    Pattern,
    /// Glyph images presented one pixel per timestep, time axis permuted.
    SeqPixels,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long, value_enum, default_value = "pattern")]
    task: Task,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Pattern task only.
    #[arg(long, default_value_t = 50)]
    timesteps: usize,
    /// Pattern task only; channel count before binning.
    #[arg(long, default_value_t = 40)]
    channels: usize,
    #[arg(long, default_value_t = 60)]
    samples_per_class: usize,
    #[arg(long, default_value_t = 0.5)]
    base_rate: f64,
    #[arg(long, default_value_t = 0.3)]
    jitter: f64,
    /// Glyph side length (seq-pixels task).
    #[arg(long, default_value_t = 8)]
    side: usize,
    /// Pixel flip probability (seq-pixels task).
    #[arg(long, default_value_t = 0.05)]
    flip_prob: f64,
    /// Time-axis permutation seed (seq-pixels task); omit for raster order.
    #[arg(long)]
    permutation_seed: Option<u64>,
    /// Channel binning factor.
    #[arg(long = "bin", default_value_t = 1)]
    bin: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct Overrides {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use a constant learning rate instead of the one-cycle schedule.
    #[arg(long)]
    no_scheduler: bool,
    /// Output directory (overrides `output_dir`).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(l) = self.lambda {
            cfg.train.lambda = l;
        }
        if let Some(name) = &self.optimizer {
            cfg.train.optimizer.algorithm = Algorithm::parse(name)?;
        }
        if let Some(lr) = self.lr {
            cfg.train.optimizer.mu = lr;
        }
        if let Some(e) = self.epochs {
            cfg.train.epochs = e;
        }
        if let Some(b) = self.batch_size {
            cfg.train.batch_size = b;
        }
        if let Some(s) = self.seed {
            cfg.train.seed = s;
        }
        if self.no_scheduler {
            cfg.train.schedule.kind = ScheduleKind::Constant;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(short, long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    split: SplitArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(short, long)]
    config: PathBuf,
    /// Comma-separated λ grid.
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    /// Seeds per λ (seed, seed+1, ...).
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct InspectArgs {
    checkpoint: PathBuf,
    /// Also write the report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::GenData(a) => cmd_gen_data(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Inspect(a) => cmd_inspect(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_gen_data(a: &GenDataArgs) -> Result<()> {
    let source = match a.task {
        Task::Pattern => DataSource::Pattern(PatternTask {
            classes: a.classes,
            timesteps: a.timesteps,
            channels: a.channels,
            samples_per_class: a.samples_per_class,
            base_rate: a.base_rate,
            jitter: a.jitter,
            ..PatternTask::default()
        }),
        Task::SeqPixels => DataSource::SeqPixels(GlyphTask {
            classes: a.classes,
            height: a.side,
            width: a.side,
            samples_per_class: a.samples_per_class,
            flip_prob: a.flip_prob,
            permutation_seed: a.permutation_seed,
        }),
    };
    let cfg = DataConfig {
        source,
        seed: a.seed,
        bin: a.bin,
        ..DataConfig::default()
    };
    let ds = cfg.dataset()?;
    ds.save(&a.output)?;
    println!("{}", ds.summary());
    println!("wrote {}", a.output.display());
    Ok(())
}

fn load_config(path: &Path, overrides: Option<&Overrides>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(o) = overrides {
        o.apply(&mut cfg)?;
    }
    Ok(cfg)
}

fn prepare(cfg: &RunConfig) -> Result<(Splits, TrainConfig)> {
    let splits = cfg.data.splits()?;
    let train = cfg.train_config(splits.train.channels, splits.train.num_classes)?;
    Ok((splits, train))
}

fn echo_config(cfg: &RunConfig) -> Result<()> {
    let text = cfg.to_toml();
    eprintln!("# effective config\n{text}");
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("config.toml"), text)?;
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = load_config(&a.config, Some(&a.overrides))?;
    let (splits, train) = prepare(&cfg)?;
    echo_config(&cfg)?;
    let out = &cfg.output_dir;
    let mut metrics = BufWriter::new(File::create(out.join("metrics.csv"))?);
    writeln!(metrics, "{}", EpochLog::CSV_HEADER)?;
    metrics.flush()?;
    let result = run_training_with(&train, &splits, &mut |log| {
        writeln!(metrics, "{}", log.to_csv_row())?;
        metrics.flush()?;
        Ok(())
    });
    let report = match result {
        Ok(r) => r,
        Err(e @ Error::Divergence { .. }) => {
            eprintln!(
                "metrics up to the divergence: {}",
                out.join("metrics.csv").display()
            );
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    report.final_checkpoint.save(out.join("final.snnc"))?;
    if let Some(best) = &report.best_checkpoint {
        best.save(out.join("best.snnc"))?;
    }
    fs::write(out.join("sparsity.csv"), report.final_report.to_csv())?;
    println!(
        "init nonzero {}/{} ({:.4})",
        report.init_report.nonzero,
        report.init_report.total,
        report.init_report.nonzero_fraction()
    );
    println!(
        "final nonzero {}/{} ({:.4})",
        report.final_report.nonzero,
        report.final_report.total,
        report.final_report.nonzero_fraction()
    );
    if let (Some(p), Some(e)) = (report.peak_val_accuracy, report.best_epoch) {
        println!("peak val accuracy {p:.4} at epoch {e}");
    }
    if let Some(t) = report.test {
        println!("test loss {:.4} accuracy {:.4}", t.loss, t.accuracy);
    }
    Ok(())
}

/// Network with parameters taken from a checkpoint's θ, matched by group name.
pub fn network_from_checkpoint(spec: NetworkSpec, ck: &Checkpoint) -> Result<Network> {
    let mut net = Network::build(spec, &mut crate::numerics::Rng::new(0))?;
    let names = net.group_names();
    for (name, slot) in names.iter().zip(net.groups_mut()) {
        let st = ck
            .get(name)
            .ok_or_else(|| Error::Config(format!("checkpoint lacks group {name}")))?;
        if st.theta.shape() != slot.shape() {
            return Err(Error::Config(format!(
                "group {name}: checkpoint shape {:?}, network {:?}",
                st.theta.shape(),
                slot.shape()
            )));
        }
        *slot = st.theta.clone();
    }
    Ok(net)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let cfg = load_config(&a.config, None)?;
    let (splits, train) = prepare(&cfg)?;
    let ck = Checkpoint::load(&a.checkpoint)?;
    let net = network_from_checkpoint(train.network, &ck)?;
    let (name, ds): (&str, &SpikeDataset) = match a.split {
        SplitArg::Train => ("train", &splits.train),
        SplitArg::Val => ("val", &splits.val),
        SplitArg::Test => ("test", &splits.test),
    };
    let ev = evaluate(&net, ds)?;
    println!("split,loss,accuracy");
    println!("{name},{},{}", ev.loss, ev.accuracy);
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let cfg = load_config(&a.config, Some(&a.overrides))?;
    let (splits, train) = prepare(&cfg)?;
    echo_config(&cfg)?;
    let out = &cfg.output_dir;
    let result = lambda_sweep(&train, &splits, &a.lambdas, a.repeats, sweep_threads())?;
    let runs_dir = out.join("runs");
    fs::create_dir_all(&runs_dir)?;
    for r in &result.runs {
        let file = runs_dir.join(format!("lambda{}_seed{}.csv", r.lambda_index, r.seed));
        fs::write(file, metrics_csv(&r.logs))?;
        if let Some(d) = &r.divergence {
            eprintln!("lambda {} seed {}: {d}", r.lambda, r.seed);
        }
    }
    fs::write(out.join("sweep.csv"), result.runs_csv())?;
    fs::write(out.join("sweep_aggregate.csv"), result.aggregate_csv())?;
    print!("{}", result.aggregate_csv());
    if result.runs.iter().all(|r| r.diverged()) {
        return Err(Error::Divergence {
            epoch: 0,
            step: 0,
            reason: "every sweep run diverged".into(),
        });
    }
    Ok(())
}

fn cmd_inspect(a: &InspectArgs) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let report = ck.sparsity();
    print!("{}", report.to_table());
    if let Some(path) = &a.csv {
        fs::write(path, report.to_csv())?;
    }
    Ok(())
}
