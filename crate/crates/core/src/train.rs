//! Training loop: cross-entropy, mini-batching, epoch metrics, divergence
//! detection and λ-sweeps.

use serde::{Deserialize, Serialize};

use crate::bregman::{sparsity_report, ProxSpec, SparsityReport};
use crate::data::{SpikeDataset, Splits};
use crate::error::{Error, Result};
use crate::numerics::{Rng, Tensor};
use crate::optim::{
    Algorithm, Checkpoint, LrSchedule, NamedState, OptimConfig, Optimizer, ParamState, ScheduleKind,
};
use crate::snn::{GroupRole, Network, NetworkSpec};

const INIT_STREAM: u64 = 10;
const SHUFFLE_STREAM: u64 = 11;

/// Softmax cross-entropy with max-subtraction; returns the loss and `softmax − onehot`.
pub fn cross_entropy(logits: &Tensor, label: usize) -> Result<(f64, Tensor)> {
    let k = logits.len();
    if label >= k {
        return Err(Error::invalid(format!("label {label} outside 0..{k}")));
    }
    let max = logits
        .data()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.data().iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (logits.data()[label] - max);
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    Ok((loss, Tensor::from_vec(grad)))
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(logits: &Tensor) -> usize {
    let mut best = 0;
    for (i, &z) in logits.data().iter().enumerate() {
        if z > logits.data()[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "ScheduleConfig::default_kind")]
    pub kind: ScheduleKind,
    #[serde(default = "ScheduleConfig::default_pct_start")]
    pub pct_start: f64,
    #[serde(default = "ScheduleConfig::default_div_factor")]
    pub div_factor: f64,
    #[serde(default = "ScheduleConfig::default_final_div_factor")]
    pub final_div_factor: f64,
}

impl ScheduleConfig {
    fn default_kind() -> ScheduleKind {
        ScheduleKind::OneCycle
    }
    fn default_pct_start() -> f64 {
        0.3
    }
    fn default_div_factor() -> f64 {
        25.0
    }
    fn default_final_div_factor() -> f64 {
        1e4
    }

    pub fn build(&self, max_lr: f64, total_steps: usize) -> LrSchedule {
        LrSchedule {
            kind: self.kind,
            max_lr,
            total_steps,
            pct_start: self.pct_start,
            div_factor: self.div_factor,
            final_div_factor: self.final_div_factor,
        }
    }
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            kind: Self::default_kind(),
            pct_start: Self::default_pct_start(),
            div_factor: Self::default_div_factor(),
            final_div_factor: Self::default_final_div_factor(),
        }
    }
}

/// Everything that determines a training run besides the data.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimConfig,
    pub lambda: f64,
    pub schedule: ScheduleConfig,
    pub seed: u64,
    pub network: NetworkSpec,
}

impl TrainConfig {
    /// Desk-scale defaults: 100 epochs, batch 32, AdaBreg at lr 5e-3 with one-cycle.
    pub fn desk_default(inputs: usize, classes: usize) -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            optimizer: OptimConfig::new(Algorithm::AdaBreg, 5e-3),
            lambda: 0.0,
            schedule: ScheduleConfig::default(),
            seed: 0,
            network: NetworkSpec::desk_default(inputs, classes),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs > 0 && self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        self.optimizer.validate()?;
        self.schedule.build(self.optimizer.mu, 1).validate()?;
        self.network.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    Train,
    Val,
    Test,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Val => "val",
            SplitKind::Test => "test",
        }
    }
}

/// One row of the metrics CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub split: SplitKind,
    pub loss: f64,
    pub accuracy: f64,
    pub nonzero_count: usize,
    pub nonzero_fraction: f64,
    pub lr: f64,
}

impl EpochLog {
    pub const CSV_HEADER: &'static str =
        "epoch,split,loss,accuracy,nonzero_count,nonzero_fraction,lr";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.epoch,
            self.split.as_str(),
            self.loss,
            self.accuracy,
            self.nonzero_count,
            self.nonzero_fraction,
            self.lr
        )
    }
}

/// Renders logs as a complete metrics CSV document.
pub fn metrics_csv(logs: &[EpochLog]) -> String {
    let mut out = String::from(EpochLog::CSV_HEADER);
    out.push('\n');
    for l in logs {
        out.push_str(&l.to_csv_row());
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// Mean loss and accuracy over a dataset. Never touches parameters.
pub fn evaluate(net: &Network, ds: &SpikeDataset) -> Result<Evaluation> {
    if ds.is_empty() {
        return Err(Error::invalid(format!(
            "cannot evaluate on empty dataset {}",
            ds.name
        )));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (x, &label) in ds.samples().iter().zip(ds.labels()) {
        let (logits, _) = net.forward(x)?;
        loss += cross_entropy(&logits, label)?.0;
        correct += (argmax(&logits) == label) as usize;
    }
    Ok(Evaluation {
        loss: loss / ds.len() as f64,
        accuracy: correct as f64 / ds.len() as f64,
    })
}

/// Network, per-group optimizer state and the step counter of one run.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub net: Network,
    pub states: Vec<NamedState>,
    pub optimizer: Optimizer,
    pub schedule: LrSchedule,
    pub batch_size: usize,
    pub global_step: usize,
    /// Non-zero count of the raw initial draw, before any thresholding.
    pub dense_init_nonzero: usize,
    shuffle_rng: Rng,
}

impl Trainer {
    /// Builds the network from `config.seed` and wraps every parameter group.
    ///
    /// Weight matrices are regularised with `L1(λ)` under LinBreg/AdaBreg;
    /// biases never are.
    pub fn new(config: &TrainConfig, train_len: usize) -> Result<Self> {
        config.validate()?;
        let mut init_rng = Rng::derive(config.seed, INIT_STREAM);
        let mut net = Network::build(config.network.clone(), &mut init_rng)?;
        let bregman = config.optimizer.algorithm.is_bregman();
        let mut dense_init_nonzero = 0;
        let states: Vec<NamedState> = net
            .groups()
            .map(|(name, role, tensor)| {
                dense_init_nonzero += tensor.count_nonzero();
                let regularized = bregman && role == GroupRole::Weight;
                let prox = if regularized {
                    ProxSpec::l1(config.lambda)?
                } else {
                    ProxSpec::none()
                };
                Ok(NamedState {
                    name,
                    state: ParamState::new(tensor.clone(), prox, regularized),
                })
            })
            .collect::<Result<_>>()?;
        for (slot, st) in net.groups_mut().into_iter().zip(&states) {
            *slot = st.state.theta.clone();
        }
        let batches = if config.batch_size == 0 {
            0
        } else {
            train_len.div_ceil(config.batch_size)
        };
        let schedule = config
            .schedule
            .build(config.optimizer.mu, config.epochs * batches);
        Ok(Self {
            net,
            states,
            optimizer: Optimizer::new(config.optimizer.clone())?,
            schedule,
            batch_size: config.batch_size,
            global_step: 0,
            dense_init_nonzero,
            shuffle_rng: Rng::derive(config.seed, SHUFFLE_STREAM),
        })
    }

    pub fn sparsity(&self) -> SparsityReport {
        sparsity_report(
            self.states
                .iter()
                .map(|g| (g.name.as_str(), &g.state.theta)),
        )
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            groups: self.states.clone(),
        }
    }

    /// One shuffled pass over `ds` with one optimizer step per mini-batch.
    pub fn train_epoch(&mut self, ds: &SpikeDataset, epoch: usize) -> Result<EpochLog> {
        if ds.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        let mut order: Vec<usize> = (0..ds.len()).collect();
        self.shuffle_rng.shuffle(&mut order);
        let mut grads = self.net.zero_gradients();
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut lr = self.schedule.lr_at(self.global_step);
        for batch in order.chunks(self.batch_size) {
            for g in &mut grads.groups {
                g.fill(0.0);
            }
            let step = self.global_step + 1;
            for &i in batch {
                let (logits, state) = self.net.forward(ds.sample(i))?;
                let (loss, dlogits) = cross_entropy(&logits, ds.label(i))?;
                loss_sum += loss;
                if !loss_sum.is_finite() {
                    return Err(divergence(epoch, step, "non-finite loss"));
                }
                correct += (argmax(&logits) == ds.label(i)) as usize;
                self.net.backward_into(&state, &dlogits, &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            lr = self.schedule.lr_at(self.global_step);
            for (named, grad) in self.states.iter_mut().zip(&grads.groups) {
                self.optimizer
                    .step(&mut named.state, grad, lr)
                    .map_err(|e| match e {
                        Error::Divergence { reason, .. } => Error::Divergence {
                            epoch,
                            step,
                            reason: format!("{reason} in {}", named.name),
                        },
                        other => other,
                    })?;
            }
            for (slot, st) in self.net.groups_mut().into_iter().zip(&self.states) {
                slot.data_mut().copy_from_slice(st.state.theta.data());
            }
            self.global_step = step;
        }
        let report = self.sparsity();
        Ok(EpochLog {
            epoch,
            split: SplitKind::Train,
            loss: loss_sum / ds.len() as f64,
            accuracy: correct as f64 / ds.len() as f64,
            nonzero_count: report.nonzero,
            nonzero_fraction: report.nonzero_fraction(),
            lr,
        })
    }
}

fn divergence(epoch: usize, step: usize, reason: &str) -> Error {
    Error::Divergence {
        epoch,
        step,
        reason: reason.to_string(),
    }
}

/// Outcome of a completed run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub logs: Vec<EpochLog>,
    /// Max validation accuracy over epochs (`None` without a validation split or epochs).
    pub peak_val_accuracy: Option<f64>,
    pub best_epoch: Option<usize>,
    pub best_checkpoint: Option<Checkpoint>,
    pub final_checkpoint: Checkpoint,
    pub dense_init_nonzero: usize,
    /// Sparsity right after initialisation (θ = prox(v₀)).
    pub init_report: SparsityReport,
    pub final_report: SparsityReport,
    /// Final-parameter test evaluation, when a test split exists.
    pub test: Option<Evaluation>,
}

impl RunReport {
    pub fn val_logs(&self) -> impl Iterator<Item = &EpochLog> {
        self.logs.iter().filter(|l| l.split == SplitKind::Val)
    }

    pub fn train_logs(&self) -> impl Iterator<Item = &EpochLog> {
        self.logs.iter().filter(|l| l.split == SplitKind::Train)
    }
}

/// Runs `config.epochs` epochs, logging train and validation rows per epoch.
pub fn run_training(config: &TrainConfig, splits: &Splits) -> Result<RunReport> {
    run_training_with(config, splits, &mut |_| Ok(()))
}

/// As [`run_training`], handing each log row to `on_log` as soon as it exists.
///
/// On divergence the rows already emitted stay with the sink and the
/// [`Error::Divergence`] is returned.
pub fn run_training_with(
    config: &TrainConfig,
    splits: &Splits,
    on_log: &mut dyn FnMut(&EpochLog) -> Result<()>,
) -> Result<RunReport> {
    if splits.train.channels != config.network.input_dim() {
        return Err(Error::shape(format!(
            "dataset has {} channels, network expects {}",
            splits.train.channels,
            config.network.input_dim()
        )));
    }
    if splits.train.num_classes > config.network.output_dim() {
        return Err(Error::shape(format!(
            "dataset has {} classes, network emits {}",
            splits.train.num_classes,
            config.network.output_dim()
        )));
    }
    let mut trainer = Trainer::new(config, splits.train.len())?;
    let init_report = trainer.sparsity();
    let mut logs = Vec::new();
    let mut peak: Option<f64> = None;
    let mut best_epoch = None;
    let mut best_checkpoint = None;
    for epoch in 1..=config.epochs {
        let train_log = trainer.train_epoch(&splits.train, epoch)?;
        on_log(&train_log)?;
        logs.push(train_log.clone());
        if !splits.val.is_empty() {
            let ev = evaluate(&trainer.net, &splits.val)?;
            if !ev.loss.is_finite() {
                return Err(divergence(
                    epoch,
                    trainer.global_step,
                    "non-finite validation loss",
                ));
            }
            let val_log = EpochLog {
                split: SplitKind::Val,
                loss: ev.loss,
                accuracy: ev.accuracy,
                ..train_log
            };
            on_log(&val_log)?;
            logs.push(val_log);
            if peak.is_none_or(|p| ev.accuracy > p) {
                peak = Some(ev.accuracy);
                best_epoch = Some(epoch);
                best_checkpoint = Some(trainer.checkpoint());
            }
        }
    }
    let test = if splits.test.is_empty() {
        None
    } else {
        Some(evaluate(&trainer.net, &splits.test)?)
    };
    Ok(RunReport {
        logs,
        peak_val_accuracy: peak,
        best_epoch,
        best_checkpoint,
        final_checkpoint: trainer.checkpoint(),
        dense_init_nonzero: trainer.dense_init_nonzero,
        final_report: trainer.sparsity(),
        init_report,
        test,
    })
}

/// One `(λ, seed)` run of a sweep.
#[derive(Clone, Debug)]
pub struct SweepRun {
    pub lambda_index: usize,
    pub lambda: f64,
    pub seed: u64,
    /// Rows emitted before completion or divergence.
    pub logs: Vec<EpochLog>,
    pub report: Option<RunReport>,
    pub divergence: Option<String>,
}

impl SweepRun {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn peak_val_accuracy(&self) -> Option<f64> {
        self.report.as_ref().and_then(|r| r.peak_val_accuracy)
    }

    pub fn final_nonzero_fraction(&self) -> Option<f64> {
        self.report
            .as_ref()
            .map(|r| r.final_report.nonzero_fraction())
    }

    pub fn test_accuracy(&self) -> Option<f64> {
        self.report
            .as_ref()
            .and_then(|r| r.test)
            .map(|t| t.accuracy)
    }
}

/// Per-λ means over completed runs; diverged runs only count in `diverged`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAggregate {
    pub lambda: f64,
    pub runs: usize,
    pub completed: usize,
    pub diverged: usize,
    pub mean_peak_val_accuracy: Option<f64>,
    pub mean_final_nonzero_fraction: Option<f64>,
    pub mean_test_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    pub aggregate: Vec<SweepAggregate>,
}

fn opt_csv(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepResult {
    pub const RUNS_HEADER: &'static str = "lambda,seed,peak_val_acc,final_nonzero_frac,diverged";
    pub const AGGREGATE_HEADER: &'static str =
        "lambda,runs,completed,mean_peak_val_acc,mean_final_nonzero_frac,mean_test_acc,diverged";

    pub fn runs_csv(&self) -> String {
        let mut out = format!("{}\n", Self::RUNS_HEADER);
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.lambda,
                r.seed,
                opt_csv(r.peak_val_accuracy()),
                opt_csv(r.final_nonzero_fraction()),
                r.diverged() as u8
            ));
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = format!("{}\n", Self::AGGREGATE_HEADER);
        for a in &self.aggregate {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                a.lambda,
                a.runs,
                a.completed,
                opt_csv(a.mean_peak_val_accuracy),
                opt_csv(a.mean_final_nonzero_fraction),
                opt_csv(a.mean_test_accuracy),
                a.diverged
            ));
        }
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Worker count for sweeps: `BREG_SNN_THREADS` if set, else all cores.
pub fn sweep_threads() -> usize {
    std::env::var("BREG_SNN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Trains one run per `(λ, repeat)` with seeds `config.seed + repeat`.
///
/// Runs execute on up to `threads` workers; results come back ordered by
/// λ index, then repeat.
pub fn lambda_sweep(
    config: &TrainConfig,
    splits: &Splits,
    lambdas: &[f64],
    repeats: usize,
    threads: usize,
) -> Result<SweepResult> {
    use rayon::prelude::*;

    if lambdas.is_empty() {
        return Err(Error::invalid("lambda list is empty"));
    }
    if repeats == 0 {
        return Err(Error::invalid("repeats must be >= 1"));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda {bad} is not a finite value >= 0"
        )));
    }
    config.validate()?;
    let jobs: Vec<(usize, f64, u64)> = lambdas
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| (0..repeats as u64).map(move |r| (i, l, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let runs: Vec<SweepRun> = pool.install(|| {
        jobs.par_iter()
            .map(|&(lambda_index, lambda, repeat)| {
                let cfg = TrainConfig {
                    lambda,
                    seed: config.seed.wrapping_add(repeat),
                    ..config.clone()
                };
                let mut logs = Vec::new();
                let outcome = run_training_with(&cfg, splits, &mut |l| {
                    logs.push(l.clone());
                    Ok(())
                });
                let (report, divergence) = match outcome {
                    Ok(r) => (Some(r), None),
                    Err(e @ Error::Divergence { .. }) => (None, Some(e.to_string())),
                    Err(e) => return Err(e),
                };
                Ok(SweepRun {
                    lambda_index,
                    lambda,
                    seed: cfg.seed,
                    logs,
                    report,
                    divergence,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let aggregate = lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let group: Vec<&SweepRun> = runs.iter().filter(|r| r.lambda_index == i).collect();
            let done = || group.iter().filter(|r| !r.diverged());
            SweepAggregate {
                lambda,
                runs: group.len(),
                completed: done().count(),
                diverged: group.iter().filter(|r| r.diverged()).count(),
                mean_peak_val_accuracy: mean(done().filter_map(|r| r.peak_val_accuracy())),
                mean_final_nonzero_fraction: mean(
                    done().filter_map(|r| r.final_nonzero_fraction()),
                ),
                mean_test_accuracy: mean(done().filter_map(|r| r.test_accuracy())),
            }
        })
        .collect();
    Ok(SweepResult { runs, aggregate })
}
