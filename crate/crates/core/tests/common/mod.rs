//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use breg_snn::bregman::ProxSpec;
use breg_snn::optim::{Algorithm, OptimConfig, Optimizer, ParamState};
use breg_snn::snn::{LayerSpec, Mode, Network, NetworkSpec};
use breg_snn::train::cross_entropy;
use breg_snn::{Rng, Tensor};

/// Textbook Adam on plain vectors, written without any crate code.
pub struct RefAdam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    s: Vec<f64>,
    t: i32,
}

impl RefAdam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            s: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, x: &mut [f64], g: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.s[i] = self.beta2 * self.s[i] + (1.0 - self.beta2) * g[i] * g[i];
            let mh = self.m[i] / c1;
            let sh = self.s[i] / c2;
            x[i] -= self.lr * mh / (sh.sqrt() + self.eps);
        }
    }
}

/// `f(x) = ½ Σ a_i (x_i − c_i)²` with random curvature and centre.
pub struct Quadratic {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

impl Quadratic {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        Self {
            a: (0..n).map(|_| rng.uniform_in(0.5, 5.0)).collect(),
            c: (0..n).map(|_| rng.normal()).collect(),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.a)
            .zip(&self.c)
            .map(|((x, a), c)| a * (x - c))
            .collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.a)
            .zip(&self.c)
            .map(|((x, a), c)| 0.5 * a * (x - c) * (x - c))
            .sum()
    }
}

/// Runs `steps` crate-optimizer steps on the quadratic and returns every iterate.
pub fn crate_trajectory(
    alg: Algorithm,
    lr: f64,
    lambda: f64,
    q: &Quadratic,
    x0: &[f64],
    steps: usize,
) -> Vec<Vec<f64>> {
    let opt = Optimizer::new(OptimConfig::new(alg, lr)).unwrap();
    let prox = if lambda > 0.0 {
        ProxSpec::l1(lambda).unwrap()
    } else {
        ProxSpec::none()
    };
    let init = Tensor::from_vec(x0.to_vec());
    let mut st = ParamState::new(init, prox, alg.is_bregman());
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let g = Tensor::from_vec(q.grad(st.theta.data()));
        opt.step(&mut st, &g, lr).unwrap();
        out.push(st.theta.data().to_vec());
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn soft_loss(net: &Network, x: &Tensor, label: usize) -> f64 {
    let (logits, _) = net.forward_with(x, Mode::Soft).unwrap();
    cross_entropy(&logits, label).unwrap().0
}

/// Max over all parameters of |analytic − numeric| / max(|analytic|, |numeric|, 1e-6),
/// with central differences of step 1e-5. Also returns the per-group worst.
pub fn max_relative_error(net: &Network, x: &Tensor, label: usize) -> (f64, Vec<(String, f64)>) {
    let (logits, state) = net.forward_with(x, Mode::Soft).unwrap();
    let (_, dlogits) = cross_entropy(&logits, label).unwrap();
    let grads = net.backward(&state, &dlogits).unwrap();
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut per_group = Vec::new();
    for (gi, name) in net.group_names().iter().enumerate() {
        let mut group_worst = 0.0f64;
        for k in 0..grads.groups[gi].len() {
            let mut plus = net.clone();
            plus.groups_mut()[gi].data_mut()[k] += h;
            let mut minus = net.clone();
            minus.groups_mut()[gi].data_mut()[k] -= h;
            let numeric = (soft_loss(&plus, x, label) - soft_loss(&minus, x, label)) / (2.0 * h);
            let analytic = grads.groups[gi].data()[k];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            group_worst = group_worst.max(rel);
        }
        worst = worst.max(group_worst);
        per_group.push((name.clone(), group_worst));
    }
    (worst, per_group)
}

/// 4 → 5 → 6 (recurrent) → 3 net with T = 10, scaled so membranes sit near
/// threshold. The top layer is a readout, or a feedforward LIF when `last_lif`.
pub fn three_layer(last_lif: bool, seed: u64) -> (Network, Tensor) {
    let mut rng = Rng::new(seed);
    let top = if last_lif {
        LayerSpec::feedforward(6, 3)
    } else {
        LayerSpec::readout(6, 3)
    };
    let spec = NetworkSpec::new(vec![
        LayerSpec::feedforward(4, 5),
        LayerSpec::recurrent(5, 6),
        top,
    ])
    .unwrap();
    let mut net = Network::build(spec, &mut rng).unwrap();
    for g in net.groups_mut() {
        let scaled = g.scale(3.0);
        *g = scaled;
    }
    for l in &mut net.layers {
        l.b = Tensor::rand_uniform(&mut rng, l.b.shape(), -0.3, 0.3).unwrap();
    }
    let x = Tensor::rand_uniform(&mut rng, &[10, 4], 0.0, 2.0)
        .unwrap()
        .map(f64::round);
    (net, x)
}

/// Logistic regression data: `n` rows of `d` standard-normal features, labels
/// drawn from `sigmoid(x·w)` where `w` has `k` non-zeros (the first `k` indices).
pub struct Logistic {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub w_true: Vec<f64>,
}

impl Logistic {
    pub fn generate(n: usize, d: usize, k: usize, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let w_true: Vec<f64> = (0..d)
            .map(|j| {
                if j < k {
                    let mag = rng.uniform_in(1.5, 3.0);
                    if rng.uniform() < 0.5 {
                        -mag
                    } else {
                        mag
                    }
                } else {
                    0.0
                }
            })
            .collect();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let z: f64 = row.iter().zip(&w_true).map(|(a, b)| a * b).sum();
            y.push(if rng.uniform() < sigmoid(z) { 1.0 } else { 0.0 });
            x.push(row);
        }
        Self { x, y, w_true }
    }

    /// Splits off the last `n` rows as a held-out set sharing `w_true`.
    pub fn split_off(&mut self, n: usize) -> Self {
        let at = self.x.len() - n;
        Self {
            x: self.x.split_off(at),
            y: self.y.split_off(at),
            w_true: self.w_true.clone(),
        }
    }

    /// Per-row logistic loss `log(1 + e^z) − y z`.
    pub fn losses(&self, w: &[f64]) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(row, &y)| {
                let z: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
                z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z
            })
            .collect()
    }

    pub fn loss(&self, w: &[f64]) -> f64 {
        let l = self.losses(w);
        l.iter().sum::<f64>() / l.len() as f64
    }

    pub fn dim(&self) -> usize {
        self.w_true.len()
    }

    pub fn informative(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.w_true[j] != 0.0).collect()
    }

    /// Gradient of the mean logistic loss.
    pub fn grad(&self, w: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.x.len()).collect();
        self.grad_on(w, &all)
    }

    /// Gradient of the mean logistic loss over the rows in `rows`.
    pub fn grad_on(&self, w: &[f64], rows: &[usize]) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        for &i in rows {
            let row = &self.x[i];
            let z: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
            let r = sigmoid(z) - self.y[i];
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += r * xj;
            }
        }
        let n = rows.len() as f64;
        g.iter_mut().for_each(|v| *v /= n);
        g
    }

    /// Largest eigenvalue bound of the Hessian: ‖X‖²_F / (4n).
    pub fn lipschitz(&self) -> f64 {
        let fro: f64 = self.x.iter().flatten().map(|v| v * v).sum();
        fro / (4.0 * self.x.len() as f64)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Proximal gradient (ISTA) on `loss + mu‖w‖₁` with step `1/L`, written
/// independently of the crate's prox.
pub fn ista(data: &Logistic, mu: f64, iters: usize) -> Vec<f64> {
    let step = 1.0 / data.lipschitz();
    let mut w = vec![0.0; data.dim()];
    for _ in 0..iters {
        let g = data.grad(&w);
        for j in 0..w.len() {
            let u = w[j] - step * g[j];
            let t = step * mu;
            w[j] = if u > t {
                u - t
            } else if u < -t {
                u + t
            } else {
                0.0
            };
        }
    }
    w
}

/// Mini-batch AdaBreg from zero on the logistic loss.
///
/// Mini-batches matter: on a constant full-batch gradient the normalised
/// moment ratio is ±1 for every feature, so all coordinates would cross λ
/// together. Stochastic gradients make the ratio track signal-to-noise.
pub fn adabreg_logistic(
    data: &Logistic,
    lambda: f64,
    lr: f64,
    epochs: usize,
    batch: usize,
    seed: u64,
) -> Vec<f64> {
    let opt = Optimizer::new(OptimConfig::new(Algorithm::AdaBreg, lr)).unwrap();
    let mut st = ParamState::new(
        Tensor::zeros(&[data.dim()]),
        ProxSpec::l1(lambda).unwrap(),
        true,
    );
    let mut rng = Rng::new(seed);
    let mut order: Vec<usize> = (0..data.x.len()).collect();
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(batch) {
            let g = Tensor::from_vec(data.grad_on(st.theta.data(), chunk));
            opt.step(&mut st, &g, lr).unwrap();
        }
    }
    st.theta.data().to_vec()
}

pub fn support(w: &[f64]) -> Vec<usize> {
    (0..w.len()).filter(|&j| w[j] != 0.0).collect()
}

/// One-standard-error rule over a λ grid: fit each λ, score on `heldout`,
/// and return the largest λ whose held-out loss is within one
/// standard error of the best, with its weights.
pub fn select_lambda(
    heldout: &Logistic,
    grid: &[f64],
    fit: impl Fn(f64) -> Vec<f64>,
) -> (f64, Vec<f64>) {
    let fits: Vec<(f64, Vec<f64>, Vec<f64>)> = grid
        .iter()
        .map(|&l| {
            let w = fit(l);
            let losses = heldout.losses(&w);
            (l, w, losses)
        })
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let best = fits
        .iter()
        .min_by(|a, b| mean(&a.2).total_cmp(&mean(&b.2)))
        .unwrap();
    let m = mean(&best.2);
    let n = best.2.len() as f64;
    let var = best.2.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    let limit = m + (var / n).sqrt();
    let chosen = fits
        .iter()
        .filter(|f| mean(&f.2) <= limit)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    (chosen.0, chosen.1.clone())
}
