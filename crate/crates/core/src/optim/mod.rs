//! SGD, Adam, LinBreg and AdaBreg on per-group parameter state.
//!
//! Every algorithm keeps a shadow variable `v` and derives the parameters
//! from it: `θ = prox(v)` for regularised groups, `θ = v` otherwise. For
//! SGD and Adam the groups are never regularised, so both reduce to their
//! textbook form.

mod checkpoint;
mod schedule;

pub use checkpoint::{Checkpoint, NamedState, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use schedule::{LrSchedule, ScheduleKind};

use serde::{Deserialize, Serialize};

use crate::bregman::ProxSpec;
use crate::error::{Error, Result};
use crate::numerics::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sgd,
    Adam,
    LinBreg,
    AdaBreg,
}

impl Algorithm {
    /// Whether the algorithm applies the proximal map to `v`.
    pub fn is_bregman(self) -> bool {
        matches!(self, Algorithm::LinBreg | Algorithm::AdaBreg)
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Algorithm::Sgd),
            "adam" => Ok(Algorithm::Adam),
            "linbreg" => Ok(Algorithm::LinBreg),
            "adabreg" => Ok(Algorithm::AdaBreg),
            other => Err(Error::invalid(format!("unknown optimizer {other:?}"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Algorithm::Sgd => "sgd",
            Algorithm::Adam => "adam",
            Algorithm::LinBreg => "linbreg",
            Algorithm::AdaBreg => "adabreg",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimConfig {
    pub algorithm: Algorithm,
    /// Base learning rate.
    #[serde(rename = "lr")]
    pub mu: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_epsilon() -> f64 {
    1e-8
}

impl OptimConfig {
    pub fn new(algorithm: Algorithm, mu: f64) -> Self {
        Self {
            algorithm,
            mu,
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_epsilon(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::invalid(format!("lr must be > 0, got {}", self.mu)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Optimizer state for one parameter group.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamState {
    pub theta: Tensor,
    /// Shadow variable.
    pub v: Tensor,
    /// First moment.
    pub m: Tensor,
    /// Second moment.
    pub s: Tensor,
    pub t: u64,
    pub prox: ProxSpec,
    pub regularized: bool,
}

impl ParamState {
    /// `v = θ_init`, zero moments, and `θ = prox(v)` right away when regularised.
    pub fn new(theta_init: Tensor, prox: ProxSpec, regularized: bool) -> Self {
        let zeros = Tensor::zeros(theta_init.shape());
        let theta = if regularized {
            prox.prox(&theta_init)
        } else {
            theta_init.clone()
        };
        Self {
            theta,
            v: theta_init,
            m: zeros.clone(),
            s: zeros,
            t: 0,
            prox,
            regularized,
        }
    }

    /// The parameters implied by the shadow variable.
    pub fn implied_theta(&self) -> Tensor {
        if self.regularized {
            self.prox.prox(&self.v)
        } else {
            self.v.clone()
        }
    }

    fn check_grad(&self, grad: &Tensor) -> Result<()> {
        if grad.shape() != self.v.shape() {
            return Err(Error::shape(format!(
                "gradient {:?} vs parameter {:?}",
                grad.shape(),
                self.v.shape()
            )));
        }
        if !grad.all_finite() {
            return Err(self.diverged("non-finite gradient"));
        }
        Ok(())
    }

    fn diverged(&self, reason: &str) -> Error {
        Error::Divergence {
            epoch: 0,
            step: self.t as usize + 1,
            reason: reason.to_string(),
        }
    }

    /// Installs a new shadow value, refreshing θ; rejects non-finite results.
    fn commit(
        &mut self,
        v: Vec<f64>,
        moments: Option<(Vec<f64>, Vec<f64>)>,
        apply_prox: bool,
    ) -> Result<()> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(self.diverged("non-finite update"));
        }
        let shape = self.v.shape().to_vec();
        self.v = Tensor::new(shape.clone(), v)?;
        if let Some((m, s)) = moments {
            self.m = Tensor::new(shape.clone(), m)?;
            self.s = Tensor::new(shape, s)?;
        }
        self.theta = if apply_prox && self.regularized {
            self.prox.prox(&self.v)
        } else {
            self.v.clone()
        };
        self.t += 1;
        Ok(())
    }
}

/// `init_param_state`, by its descriptive name.
pub fn init_param_state(theta_init: Tensor, prox: ProxSpec, regularized: bool) -> ParamState {
    ParamState::new(theta_init, prox, regularized)
}

/// Applies one update of the configured algorithm.
#[derive(Clone, Debug)]
pub struct Optimizer {
    pub config: OptimConfig,
}

impl Optimizer {
    pub fn new(config: OptimConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn step(&self, state: &mut ParamState, grad: &Tensor, lr: f64) -> Result<()> {
        match self.config.algorithm {
            Algorithm::Sgd => self.sgd_step(state, grad, lr),
            Algorithm::Adam => self.adam_step(state, grad, lr),
            Algorithm::LinBreg => self.linbreg_step(state, grad, lr),
            Algorithm::AdaBreg => self.adabreg_step(state, grad, lr),
        }
    }

    /// `v ← v − lr·g`, `θ ← v`.
    pub fn sgd_step(&self, state: &mut ParamState, grad: &Tensor, lr: f64) -> Result<()> {
        state.check_grad(grad)?;
        let v = plain_descent(&state.v, grad, lr);
        state.commit(v, None, false)
    }

    /// Bias-corrected Adam; `θ ← v`.
    pub fn adam_step(&self, state: &mut ParamState, grad: &Tensor, lr: f64) -> Result<()> {
        state.check_grad(grad)?;
        let (v, m, s) = self.moment_descent(state, grad, lr);
        state.commit(v, Some((m, s)), false)
    }

    /// `v ← v − lr·g`, `θ ← prox(v)`.
    pub fn linbreg_step(&self, state: &mut ParamState, grad: &Tensor, lr: f64) -> Result<()> {
        state.check_grad(grad)?;
        let v = plain_descent(&state.v, grad, lr);
        state.commit(v, None, true)
    }

    /// Adam moments and bias correction driving the shadow variable, then `θ ← prox(v)`.
    pub fn adabreg_step(&self, state: &mut ParamState, grad: &Tensor, lr: f64) -> Result<()> {
        state.check_grad(grad)?;
        let (v, m, s) = self.moment_descent(state, grad, lr);
        state.commit(v, Some((m, s)), true)
    }

    fn moment_descent(
        &self,
        state: &ParamState,
        grad: &Tensor,
        lr: f64,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let OptimConfig {
            beta1,
            beta2,
            epsilon,
            ..
        } = self.config;
        let t = (state.t + 1) as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        let n = grad.len();
        let mut v = Vec::with_capacity(n);
        let mut m = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for i in 0..n {
            let g = grad.data()[i];
            let mi = beta1 * state.m.data()[i] + (1.0 - beta1) * g;
            let si = beta2 * state.s.data()[i] + (1.0 - beta2) * g * g;
            let m_hat = mi / bc1;
            let s_hat = si / bc2;
            v.push(state.v.data()[i] - lr * m_hat / (s_hat.sqrt() + epsilon));
            m.push(mi);
            s.push(si);
        }
        (v, m, s)
    }
}

fn plain_descent(v: &Tensor, grad: &Tensor, lr: f64) -> Vec<f64> {
    v.data()
        .iter()
        .zip(grad.data())
        .map(|(&x, &g)| x - lr * g)
        .collect()
}

/// Bias-corrected first moment `m / (1 − β₁ᵗ)` of a state.
pub fn bias_corrected_mean(state: &ParamState, beta1: f64) -> Tensor {
    let bc = 1.0 - beta1.powi(state.t as i32);
    state.m.scale(1.0 / bc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::soft_threshold;

    fn scalar_state(v: f64, lambda: f64, regularized: bool) -> ParamState {
        let prox = if lambda > 0.0 {
            ProxSpec::l1(lambda).unwrap()
        } else {
            ProxSpec::none()
        };
        ParamState::new(Tensor::scalar(v), prox, regularized)
    }

    fn opt(alg: Algorithm) -> Optimizer {
        Optimizer::new(OptimConfig::new(alg, 0.1)).unwrap()
    }

    #[test]
    fn sgd_examples() {
        let o = opt(Algorithm::Sgd);
        let mut st = scalar_state(1.0, 0.0, false);
        o.sgd_step(&mut st, &Tensor::scalar(1.0), 0.1).unwrap();
        assert_eq!(st.theta.data(), &[0.9]);
        assert_eq!(st.t, 1);

        let mut st = scalar_state(1.0, 0.0, false);
        o.sgd_step(&mut st, &Tensor::scalar(0.0), 0.1).unwrap();
        assert_eq!(st.theta.data(), &[1.0]);

        // loop oracle
        let (theta0, g, lr) = (2.0, 0.3, 0.05);
        let mut st = scalar_state(theta0, 0.0, false);
        let mut expected = theta0;
        for _ in 0..10 {
            o.sgd_step(&mut st, &Tensor::scalar(g), lr).unwrap();
            expected -= lr * g;
        }
        assert_eq!(st.theta.data()[0], expected);
        assert!((expected - (theta0 - 10.0 * lr * g)).abs() < 1e-14);
    }

    #[test]
    fn adam_first_step_is_about_lr() {
        let o = opt(Algorithm::Adam);
        for g in [0.5, -3.0, 1e-3] {
            let mut st = scalar_state(0.0, 0.0, false);
            o.adam_step(&mut st, &Tensor::scalar(g), 0.01).unwrap();
            // m̂ = g, ŝ = g², step = lr·g/(|g|+ε)
            let expected = -0.01 * g / (g.abs() + 1e-8);
            assert!((st.theta.data()[0] - expected).abs() < 1e-15);
            assert!((st.theta.data()[0].abs() - 0.01).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_gradient_keeps_theta() {
        for alg in [
            Algorithm::Adam,
            Algorithm::AdaBreg,
            Algorithm::Sgd,
            Algorithm::LinBreg,
        ] {
            let o = opt(alg);
            let mut st = scalar_state(0.7, 0.0, false);
            for _ in 0..20 {
                o.step(&mut st, &Tensor::scalar(0.0), 0.1).unwrap();
            }
            assert_eq!(st.theta.data(), &[0.7], "{alg}");
        }
    }

    #[test]
    fn linbreg_shadow_memory() {
        let o = opt(Algorithm::LinBreg);
        let mut st = scalar_state(0.4, 0.5, true);
        assert_eq!(st.theta.data(), &[0.0]);
        o.linbreg_step(&mut st, &Tensor::scalar(0.0), 0.1).unwrap();
        assert_eq!(st.theta.data(), &[0.0]);
        assert_eq!(st.v.data(), &[0.4]);
    }

    #[test]
    fn linbreg_reactivation() {
        let o = opt(Algorithm::LinBreg);
        let mut st = scalar_state(0.4, 0.5, true);
        let (mut v, mut thetas) = (0.4f64, vec![]);
        for _ in 0..3 {
            o.linbreg_step(&mut st, &Tensor::scalar(-0.1), 1.0).unwrap();
            v -= 1.0 * -0.1;
            thetas.push(st.theta.data()[0]);
        }
        assert_eq!(st.v.data()[0], v);
        assert!((v - 0.7).abs() < 1e-15);
        assert!((st.theta.data()[0] - 0.2).abs() < 1e-15);
        // still dead after the first step, alive after the second
        assert_eq!(thetas[0], 0.0);
        assert!(thetas[1] > 0.0);
    }

    #[test]
    fn adabreg_large_lambda_pins_theta() {
        let o = opt(Algorithm::AdaBreg);
        let mut st = scalar_state(0.01, 5.0, true);
        for i in 0..50 {
            let g = if i % 2 == 0 { 1e-3 } else { -2e-3 };
            o.adabreg_step(&mut st, &Tensor::scalar(g), 0.01).unwrap();
            assert_eq!(st.theta.data()[0].to_bits(), 0.0f64.to_bits());
        }
        assert_ne!(st.v.data()[0], 0.01);
    }

    #[test]
    fn init_examples() {
        let init = Tensor::from_vec(vec![0.3, -0.2, 0.05, -0.6, 0.0]);
        let st = init_param_state(init.clone(), ProxSpec::none(), true);
        assert_eq!(st.theta, init);
        let st = init_param_state(init.clone(), ProxSpec::l1(1.0).unwrap(), true);
        assert_eq!(st.theta.count_nonzero(), 0);
        let lambda = 0.1;
        let st = init_param_state(init.clone(), ProxSpec::l1(lambda).unwrap(), true);
        let brute = init.data().iter().filter(|x| x.abs() > lambda).count();
        assert_eq!(st.theta.count_nonzero(), brute);
        assert_eq!(st.theta, soft_threshold(&init, lambda).unwrap());
        assert_eq!(st.t, 0);
        assert_eq!(st.m.count_nonzero() + st.s.count_nonzero(), 0);
    }

    #[test]
    fn non_finite_gradient_is_divergence() {
        let o = opt(Algorithm::AdaBreg);
        let mut st = scalar_state(1.0, 0.1, true);
        let before = st.clone();
        let err = o.step(&mut st, &Tensor::scalar(f64::NAN), 0.1).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 1, .. }));
        assert_eq!(st, before);

        let mut st = scalar_state(1e308, 0.0, false);
        let err = opt(Algorithm::Sgd)
            .sgd_step(&mut st, &Tensor::scalar(-1e308), 10.0)
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn gradient_shape_checked() {
        let mut st = scalar_state(1.0, 0.0, false);
        assert!(matches!(
            opt(Algorithm::Sgd).step(&mut st, &Tensor::zeros(&[2]), 0.1),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(OptimConfig::new(Algorithm::Adam, 0.0).validate().is_err());
        let mut c = OptimConfig::new(Algorithm::Adam, 1e-3);
        c.beta2 = 1.0;
        assert!(c.validate().is_err());
        c.beta2 = 0.999;
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
        assert_eq!(Algorithm::parse("AdaBreg").unwrap(), Algorithm::AdaBreg);
        assert!(Algorithm::parse("rmsprop").is_err());
    }
}
