//! Discrete-time LIF networks trained with surrogate-gradient BPTT.
//!
//! Per timestep, a LIF layer integrates, thresholds, then subtract-resets:
//!
//! ```text
//! u' = β·u + I          I = W·x + R·s_prev + b
//! s  = H(u' − u_th)
//! u  = u' − u_th·s
//! ```
//!
//! The backward pass replaces `H'` by the fast-sigmoid surrogate
//! `1/(1 + k|u' − u_th|)²` and keeps the reset pathway in the membrane
//! recursion. [`Mode::Soft`] swaps the spike for a smooth sigmoid and drops
//! the reset, which makes the whole forward pass differentiable and hence
//! checkable against finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Rng, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Reset {
    #[default]
    SubtractThreshold,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifParams {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub reset: Reset,
    #[serde(default = "default_slope")]
    pub surrogate_slope: f64,
}

fn default_beta() -> f64 {
    0.9
}

fn default_threshold() -> f64 {
    1.0
}

fn default_slope() -> f64 {
    10.0
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            threshold: default_threshold(),
            reset: Reset::SubtractThreshold,
            surrogate_slope: default_slope(),
        }
    }
}

impl LifParams {
    /// β = 1 (a perfect integrator) is accepted as a limiting case.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid(format!(
                "beta must be in (0, 1], got {}",
                self.beta
            )));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::invalid(format!(
                "threshold must be > 0, got {}",
                self.threshold
            )));
        }
        if !(self.surrogate_slope > 0.0) {
            return Err(Error::invalid(format!(
                "surrogate slope must be > 0, got {}",
                self.surrogate_slope
            )));
        }
        Ok(())
    }
}

/// One LIF update. Returns the post-reset membrane and the spikes.
pub fn lif_step(u: &Tensor, input_current: &Tensor, p: &LifParams) -> Result<(Tensor, Tensor)> {
    let pre = u.scale(p.beta).add(input_current)?;
    let spikes = pre.map(|x| heaviside(x - p.threshold));
    let post = pre.sub(&spikes.scale(p.threshold))?;
    Ok((post, spikes))
}

#[inline]
fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn fast_sigmoid_grad(x: f64, k: f64) -> f64 {
    let d = 1.0 + k * x.abs();
    1.0 / (d * d)
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Surrogate derivative of the spike nonlinearity, evaluated at `x = u − u_th`.
pub fn surrogate_grad(x: &Tensor, k: f64) -> Tensor {
    x.map(|v| fast_sigmoid_grad(v, k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    #[serde(rename = "feedforward")]
    FeedforwardLif,
    #[serde(rename = "recurrent")]
    RecurrentLif,
    #[serde(rename = "readout")]
    LinearReadout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub lif: Option<LifParams>,
}

impl LayerSpec {
    pub fn feedforward(in_dim: usize, out_dim: usize) -> Self {
        Self {
            kind: LayerKind::FeedforwardLif,
            in_dim,
            out_dim,
            lif: Some(LifParams::default()),
        }
    }

    pub fn recurrent(in_dim: usize, out_dim: usize) -> Self {
        Self {
            kind: LayerKind::RecurrentLif,
            ..Self::feedforward(in_dim, out_dim)
        }
    }

    pub fn readout(in_dim: usize, out_dim: usize) -> Self {
        Self {
            kind: LayerKind::LinearReadout,
            in_dim,
            out_dim,
            lif: None,
        }
    }

    pub fn with_lif(mut self, lif: LifParams) -> Self {
        if self.kind != LayerKind::LinearReadout {
            self.lif = Some(lif);
        }
        self
    }
}

/// Ordered layer stack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        let spec = Self { layers };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::invalid("network has no layers"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.in_dim == 0 || l.out_dim == 0 {
                return Err(Error::invalid(format!("layer {i} has a zero dimension")));
            }
            if i > 0 && self.layers[i - 1].out_dim != l.in_dim {
                return Err(Error::shape(format!(
                    "layer {i} expects {} inputs but layer {} emits {}",
                    l.in_dim,
                    i - 1,
                    self.layers[i - 1].out_dim
                )));
            }
            match (l.kind, &l.lif) {
                (LayerKind::LinearReadout, _) if i + 1 != self.layers.len() => {
                    return Err(Error::invalid(
                        "a linear readout may only be the final layer",
                    ));
                }
                (LayerKind::LinearReadout, Some(_)) => {
                    return Err(Error::invalid("linear readout takes no LIF parameters"));
                }
                (LayerKind::LinearReadout, None) => {}
                (_, None) => return Err(Error::invalid(format!("LIF layer {i} lacks parameters"))),
                (_, Some(p)) => p.validate()?,
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    /// Desk-scale default: `inputs → 64 → 64 (recurrent) → classes` readout.
    pub fn desk_default(inputs: usize, classes: usize) -> Self {
        Self {
            layers: vec![
                LayerSpec::feedforward(inputs, 64),
                LayerSpec::recurrent(64, 64),
                LayerSpec::readout(64, classes),
            ],
        }
    }

    /// SHD-sized network: 140 → 256 → 256 (recurrent) → 20, last layer LIF.
    pub fn shd() -> Self {
        Self {
            layers: vec![
                LayerSpec::feedforward(140, 256),
                LayerSpec::recurrent(256, 256),
                LayerSpec::feedforward(256, 20),
            ],
        }
    }

    /// SSC-sized network: 140 → 3 × 256 (recurrent) → 35 readout.
    pub fn ssc() -> Self {
        Self {
            layers: vec![
                LayerSpec::recurrent(140, 256),
                LayerSpec::recurrent(256, 256),
                LayerSpec::recurrent(256, 256),
                LayerSpec::readout(256, 35),
            ],
        }
    }

    /// PSMNIST-sized network: 1 → 64 → 212 → 212 (all recurrent) → 10 readout.
    pub fn psmnist() -> Self {
        Self {
            layers: vec![
                LayerSpec::recurrent(1, 64),
                LayerSpec::recurrent(64, 212),
                LayerSpec::recurrent(212, 212),
                LayerSpec::readout(212, 10),
            ],
        }
    }
}

/// Trainable tensors of one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub w: Tensor,
    pub r: Option<Tensor>,
    pub b: Tensor,
}

/// Whether a parameter group is a weight matrix (regularised) or a bias.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupRole {
    Weight,
    Bias,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub spec: NetworkSpec,
    pub layers: Vec<LayerParams>,
}

/// Spike nonlinearity used by the forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Spiking,
    /// Sigmoid spikes, no reset. For gradient checking only.
    Soft,
}

#[derive(Clone, Debug, PartialEq)]
struct LayerTrace {
    /// Pre-reset membrane `u'`, `[T × out]`.
    membrane: Vec<f64>,
    /// Layer output per step, `[T × out]` (spikes, or readout outputs).
    output: Vec<f64>,
}

/// Per-timestep cache of a forward pass, consumed by [`Network::backward`].
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState {
    mode: Mode,
    timesteps: usize,
    input: Tensor,
    layers: Vec<LayerTrace>,
}

impl NetworkState {
    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Spikes (or readout outputs) of `layer`, shape `[T × out]`.
    pub fn layer_output(&self, layer: usize) -> Option<&[f64]> {
        self.layers.get(layer).map(|t| t.output.as_slice())
    }

    /// Total spike count over all LIF layers.
    pub fn spike_count(&self, spec: &NetworkSpec) -> f64 {
        self.layers
            .iter()
            .zip(&spec.layers)
            .filter(|(_, l)| l.kind != LayerKind::LinearReadout)
            .map(|(t, _)| t.output.iter().sum::<f64>())
            .sum()
    }
}

/// Gradients for every parameter group, in [`Network::group_names`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub groups: Vec<Tensor>,
}

impl Gradients {
    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.groups {
            g.data_mut().iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.groups.iter().all(Tensor::all_finite)
    }
}

fn nonzero_indices(x: &[f64], out: &mut Vec<usize>) {
    out.clear();
    out.extend(
        x.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i),
    );
}

/// `acc[i] += Σ_j W[i, j]·x[j]` over the listed non-zero `j`.
fn matvec_sparse(w: &[f64], cols: usize, x: &[f64], nz: &[usize], acc: &mut [f64]) {
    for (i, a) in acc.iter_mut().enumerate() {
        let row = &w[i * cols..(i + 1) * cols];
        let mut sum = 0.0;
        for &j in nz {
            sum += row[j] * x[j];
        }
        *a += sum;
    }
}

/// `acc[j] += Σ_i W[i, j]·g[i]`.
fn matvec_transposed(w: &[f64], cols: usize, g: &[f64], acc: &mut [f64]) {
    for (i, &gi) in g.iter().enumerate() {
        if gi == 0.0 {
            continue;
        }
        let row = &w[i * cols..(i + 1) * cols];
        for (a, &wij) in acc.iter_mut().zip(row) {
            *a += wij * gi;
        }
    }
}

/// `G[i, j] += g[i]·x[j]` over the listed non-zero `j`.
fn outer_sparse(grad: &mut [f64], cols: usize, g: &[f64], x: &[f64], nz: &[usize]) {
    if nz.is_empty() {
        return;
    }
    for (i, &gi) in g.iter().enumerate() {
        if gi == 0.0 {
            continue;
        }
        let row = &mut grad[i * cols..(i + 1) * cols];
        for &j in nz {
            row[j] += gi * x[j];
        }
    }
}

impl Network {
    /// Uniform init in `±√(1/fan_in)`; recurrent kernels use `fan_in = out_dim`; zero biases.
    pub fn build(spec: NetworkSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.layers.len());
        for l in &spec.layers {
            let bound = (1.0 / l.in_dim as f64).sqrt();
            let w = Tensor::rand_uniform(rng, &[l.out_dim, l.in_dim], -bound, bound)?;
            let r = if l.kind == LayerKind::RecurrentLif {
                let bound = (1.0 / l.out_dim as f64).sqrt();
                Some(Tensor::rand_uniform(
                    rng,
                    &[l.out_dim, l.out_dim],
                    -bound,
                    bound,
                )?)
            } else {
                None
            };
            layers.push(LayerParams {
                w,
                r,
                b: Tensor::zeros(&[l.out_dim]),
            });
        }
        Ok(Self { spec, layers })
    }

    pub fn group_names(&self) -> Vec<String> {
        self.groups().map(|(n, _, _)| n).collect()
    }

    /// `(name, role, tensor)` for every trainable group.
    pub fn groups(&self) -> impl Iterator<Item = (String, GroupRole, &Tensor)> {
        self.layers.iter().enumerate().flat_map(|(i, l)| {
            let mut v = vec![(format!("layer{i}.w"), GroupRole::Weight, &l.w)];
            if let Some(r) = &l.r {
                v.push((format!("layer{i}.r"), GroupRole::Weight, r));
            }
            v.push((format!("layer{i}.b"), GroupRole::Bias, &l.b));
            v
        })
    }

    pub fn groups_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push(&mut l.w);
            if let Some(r) = &mut l.r {
                out.push(r);
            }
            out.push(&mut l.b);
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.groups().map(|(_, _, t)| t.len()).sum()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            groups: self
                .groups()
                .map(|(_, _, t)| Tensor::zeros(t.shape()))
                .collect(),
        }
    }

    pub fn forward(&self, sample: &Tensor) -> Result<(Tensor, NetworkState)> {
        self.forward_with(sample, Mode::Spiking)
    }

    pub fn forward_with(&self, sample: &Tensor, mode: Mode) -> Result<(Tensor, NetworkState)> {
        let (timesteps, channels) = sample.dims2()?;
        if channels != self.spec.input_dim() {
            return Err(Error::shape(format!(
                "sample has {channels} channels, network expects {}",
                self.spec.input_dim()
            )));
        }
        let mut traces: Vec<LayerTrace> = Vec::with_capacity(self.layers.len());
        let mut logits = Vec::new();
        let mut nz = Vec::new();
        let mut nz_rec = Vec::new();
        for (li, (spec, params)) in self.spec.layers.iter().zip(&self.layers).enumerate() {
            let input: &[f64] = if li == 0 {
                sample.data()
            } else {
                &traces[li - 1].output
            };
            let (n_in, n_out) = (spec.in_dim, spec.out_dim);
            let w = params.w.data();
            let b = params.b.data();
            match spec.kind {
                LayerKind::LinearReadout => {
                    let mut mean_in = vec![0.0; n_in];
                    for t in 0..timesteps {
                        for (m, &x) in mean_in.iter_mut().zip(&input[t * n_in..(t + 1) * n_in]) {
                            *m += x;
                        }
                    }
                    let inv_t = 1.0 / timesteps.max(1) as f64;
                    mean_in.iter_mut().for_each(|m| *m *= inv_t);
                    nonzero_indices(&mean_in, &mut nz);
                    let mut y = b.to_vec();
                    matvec_sparse(w, n_in, &mean_in, &nz, &mut y);
                    logits = y.clone();
                    traces.push(LayerTrace {
                        membrane: Vec::new(),
                        output: y,
                    });
                }
                LayerKind::FeedforwardLif | LayerKind::RecurrentLif => {
                    let p = spec.lif.expect("validated");
                    let mut membrane = vec![0.0; timesteps * n_out];
                    let mut output = vec![0.0; timesteps * n_out];
                    let mut u = vec![0.0; n_out];
                    let mut current = vec![0.0; n_out];
                    for t in 0..timesteps {
                        let x = &input[t * n_in..(t + 1) * n_in];
                        current.copy_from_slice(b);
                        nonzero_indices(x, &mut nz);
                        matvec_sparse(w, n_in, x, &nz, &mut current);
                        if let (Some(r), true) = (&params.r, t > 0) {
                            let prev = &output[(t - 1) * n_out..t * n_out];
                            nonzero_indices(prev, &mut nz_rec);
                            matvec_sparse(r.data(), n_out, prev, &nz_rec, &mut current);
                        }
                        let mem = &mut membrane[t * n_out..(t + 1) * n_out];
                        let out = &mut output[t * n_out..(t + 1) * n_out];
                        for i in 0..n_out {
                            let pre = p.beta * u[i] + current[i];
                            mem[i] = pre;
                            match mode {
                                Mode::Spiking => {
                                    let s = heaviside(pre - p.threshold);
                                    out[i] = s;
                                    u[i] = pre - p.threshold * s;
                                }
                                Mode::Soft => {
                                    out[i] = sigmoid(p.surrogate_slope * (pre - p.threshold));
                                    u[i] = pre;
                                }
                            }
                        }
                    }
                    if li + 1 == self.layers.len() {
                        logits = vec![0.0; n_out];
                        for t in 0..timesteps {
                            for (l, &s) in
                                logits.iter_mut().zip(&output[t * n_out..(t + 1) * n_out])
                            {
                                *l += s;
                            }
                        }
                        let inv_t = 1.0 / timesteps.max(1) as f64;
                        logits.iter_mut().for_each(|l| *l *= inv_t);
                    }
                    traces.push(LayerTrace { membrane, output });
                }
            }
        }
        let state = NetworkState {
            mode,
            timesteps,
            input: sample.clone(),
            layers: traces,
        };
        Ok((Tensor::from_vec(logits), state))
    }

    pub fn backward(&self, state: &NetworkState, dlogits: &Tensor) -> Result<Gradients> {
        let mut grads = self.zero_gradients();
        self.backward_into(state, dlogits, &mut grads)?;
        Ok(grads)
    }

    /// Accumulates `∂loss/∂θ` into `grads` given `∂loss/∂logits`.
    pub fn backward_into(
        &self,
        state: &NetworkState,
        dlogits: &Tensor,
        grads: &mut Gradients,
    ) -> Result<()> {
        self.check_state(state)?;
        if dlogits.len() != self.spec.output_dim() {
            return Err(Error::shape(format!(
                "dlogits has {} entries, network emits {}",
                dlogits.len(),
                self.spec.output_dim()
            )));
        }
        if grads.groups.len() != self.groups().count() {
            return Err(Error::shape("gradient buffer does not match network"));
        }
        let timesteps = state.timesteps;
        let inv_t = 1.0 / timesteps.max(1) as f64;
        let n_layers = self.layers.len();

        // group offsets per layer
        let mut offsets = Vec::with_capacity(n_layers);
        let mut g = 0;
        for l in &self.layers {
            offsets.push(g);
            g += if l.r.is_some() { 3 } else { 2 };
        }

        // gradient w.r.t. the output of the layer being processed, [T × out]
        let mut upstream: Vec<f64>;
        let last = n_layers - 1;
        let top = &self.spec.layers[last];
        let mut nz = Vec::new();
        match top.kind {
            LayerKind::LinearReadout => {
                let n_in = top.in_dim;
                let input = self.layer_input(state, last);
                let mut mean_in = vec![0.0; n_in];
                for t in 0..timesteps {
                    for (m, &x) in mean_in.iter_mut().zip(&input[t * n_in..(t + 1) * n_in]) {
                        *m += x;
                    }
                }
                mean_in.iter_mut().for_each(|m| *m *= inv_t);
                nonzero_indices(&mean_in, &mut nz);
                let o = offsets[last];
                outer_sparse(
                    grads.groups[o].data_mut(),
                    n_in,
                    dlogits.data(),
                    &mean_in,
                    &nz,
                );
                for (gb, &d) in grads.groups[o + 1]
                    .data_mut()
                    .iter_mut()
                    .zip(dlogits.data())
                {
                    *gb += d;
                }
                let mut per_step = vec![0.0; n_in];
                matvec_transposed(
                    self.layers[last].w.data(),
                    n_in,
                    dlogits.data(),
                    &mut per_step,
                );
                per_step.iter_mut().for_each(|x| *x *= inv_t);
                upstream = per_step.repeat(timesteps);
            }
            _ => {
                let per_step: Vec<f64> = dlogits.data().iter().map(|d| d * inv_t).collect();
                upstream = per_step.repeat(timesteps);
            }
        }

        let first_lif = if top.kind == LayerKind::LinearReadout {
            last.checked_sub(1)
        } else {
            Some(last)
        };
        let Some(first_lif) = first_lif else {
            return Ok(());
        };

        for li in (0..=first_lif).rev() {
            let spec = &self.spec.layers[li];
            let params = &self.layers[li];
            let p = spec.lif.expect("validated");
            let (n_in, n_out) = (spec.in_dim, spec.out_dim);
            let trace = &state.layers[li];
            let input = self.layer_input(state, li);
            let o = offsets[li];
            let mut downstream = if li > 0 {
                vec![0.0; timesteps * n_in]
            } else {
                Vec::new()
            };
            let mut g_mem_carry = vec![0.0; n_out];
            let mut g_spike_rec = vec![0.0; n_out];
            let mut g_cur = vec![0.0; n_out];
            for t in (0..timesteps).rev() {
                let mem = &trace.membrane[t * n_out..(t + 1) * n_out];
                let out = &trace.output[t * n_out..(t + 1) * n_out];
                let up = &upstream[t * n_out..(t + 1) * n_out];
                for i in 0..n_out {
                    let gs = up[i] + g_spike_rec[i];
                    let (ds, dmem) = match state.mode {
                        Mode::Spiking => {
                            let ds = fast_sigmoid_grad(mem[i] - p.threshold, p.surrogate_slope);
                            (ds, 1.0 - p.threshold * ds)
                        }
                        Mode::Soft => {
                            let s = out[i];
                            (p.surrogate_slope * s * (1.0 - s), 1.0)
                        }
                    };
                    g_cur[i] = g_mem_carry[i] * dmem + gs * ds;
                }
                let x = &input[t * n_in..(t + 1) * n_in];
                nonzero_indices(x, &mut nz);
                outer_sparse(grads.groups[o].data_mut(), n_in, &g_cur, x, &nz);
                let bias_slot = if params.r.is_some() { o + 2 } else { o + 1 };
                for (gb, &gc) in grads.groups[bias_slot].data_mut().iter_mut().zip(&g_cur) {
                    *gb += gc;
                }
                g_spike_rec.iter_mut().for_each(|x| *x = 0.0);
                if let (Some(r), true) = (&params.r, t > 0) {
                    let prev = &trace.output[(t - 1) * n_out..t * n_out];
                    nonzero_indices(prev, &mut nz);
                    outer_sparse(grads.groups[o + 1].data_mut(), n_out, &g_cur, prev, &nz);
                    matvec_transposed(r.data(), n_out, &g_cur, &mut g_spike_rec);
                }
                if li > 0 {
                    matvec_transposed(
                        params.w.data(),
                        n_in,
                        &g_cur,
                        &mut downstream[t * n_in..(t + 1) * n_in],
                    );
                }
                for (c, &gc) in g_mem_carry.iter_mut().zip(&g_cur) {
                    *c = p.beta * gc;
                }
            }
            upstream = downstream;
        }
        Ok(())
    }

    fn layer_input<'a>(&self, state: &'a NetworkState, layer: usize) -> &'a [f64] {
        if layer == 0 {
            state.input.data()
        } else {
            &state.layers[layer - 1].output
        }
    }

    fn check_state(&self, state: &NetworkState) -> Result<()> {
        if state.layers.len() != self.layers.len() {
            return Err(Error::invalid(format!(
                "cached state covers {} layers, network has {}",
                state.layers.len(),
                self.layers.len()
            )));
        }
        for (i, (trace, spec)) in state.layers.iter().zip(&self.spec.layers).enumerate() {
            let expected = match spec.kind {
                LayerKind::LinearReadout => spec.out_dim,
                _ => state.timesteps * spec.out_dim,
            };
            if trace.output.len() != expected {
                return Err(Error::invalid(format!(
                    "cached state for layer {i} does not match the network"
                )));
            }
        }
        Ok(())
    }
}

/// `build_network`, by its descriptive name.
pub fn build_network(spec: NetworkSpec, rng: &mut Rng) -> Result<Network> {
    Network::build(spec, rng)
}
