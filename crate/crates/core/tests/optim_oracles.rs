//! Optimizers against independent reference implementations.

mod common;

use breg_snn::bregman::ProxSpec;
use breg_snn::optim::{bias_corrected_mean, Algorithm, OptimConfig, Optimizer, ParamState};
use breg_snn::{Rng, Tensor};
use common::*;

fn start(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed);
    (0..n).map(|_| rng.uniform_in(-2.0, 2.0)).collect()
}

#[test]
fn adam_matches_reference_adam() {
    let q = Quadratic::random(10, 1);
    let x0 = start(10, 2);
    let ours = crate_trajectory(Algorithm::Adam, 1e-2, 0.0, &q, &x0, 1000);
    let mut reference = RefAdam::new(10, 1e-2);
    let mut x = x0.clone();
    for theta in &ours {
        let g = q.grad(&x);
        reference.step(&mut x, &g);
        assert!(max_abs_diff(theta, &x) < 1e-12);
    }
}

#[test]
fn adabreg_without_penalty_is_adam() {
    let q = Quadratic::random(10, 3);
    let x0 = start(10, 4);
    let ours = crate_trajectory(Algorithm::AdaBreg, 1e-2, 0.0, &q, &x0, 1000);
    let mut reference = RefAdam::new(10, 1e-2);
    let mut x = x0.clone();
    let mut worst = 0.0f64;
    for theta in &ours {
        let g = q.grad(&x);
        reference.step(&mut x, &g);
        worst = worst.max(max_abs_diff(theta, &x));
    }
    assert!(worst < 1e-12, "max |Δθ| = {worst:e}");
}

#[test]
fn linbreg_without_penalty_is_sgd() {
    let q = Quadratic::random(10, 5);
    let x0 = start(10, 6);
    let ours = crate_trajectory(Algorithm::LinBreg, 0.05, 0.0, &q, &x0, 1000);
    let mut x = x0.clone();
    for theta in &ours {
        let g = q.grad(&x);
        x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= 0.05 * gi);
        assert!(max_abs_diff(theta, &x) < 1e-12);
    }
}

#[test]
fn sgd_descends_a_quadratic_monotonically() {
    let q = Quadratic::random(10, 7);
    let x0 = start(10, 8);
    // lr below 2 / max curvature (5)
    let traj = crate_trajectory(Algorithm::Sgd, 0.1, 0.0, &q, &x0, 200);
    let mut prev = q.value(&x0);
    for x in &traj {
        let f = q.value(x);
        assert!(f <= prev);
        prev = f;
    }
    assert!(prev < 1e-12);
}

#[test]
fn adam_converges_on_a_quadratic() {
    let q = Quadratic::random(10, 9);
    let traj = crate_trajectory(Algorithm::Adam, 1e-2, 0.0, &q, &start(10, 10), 3000);
    assert!(max_abs_diff(traj.last().unwrap(), &q.c) < 1e-3);
}

#[test]
fn bias_correction_recovers_a_constant_gradient() {
    let opt = Optimizer::new(OptimConfig::new(Algorithm::Adam, 1e-3)).unwrap();
    let g = Tensor::from_vec(vec![0.3, -1.7, 4.0, 1e-3]);
    for t in [1u64, 5, 50] {
        let mut st = ParamState::new(Tensor::zeros(&[4]), ProxSpec::none(), false);
        for _ in 0..t {
            opt.step(&mut st, &g, 1e-3).unwrap();
        }
        let m_hat = bias_corrected_mean(&st, 0.9);
        assert!(max_abs_diff(m_hat.data(), g.data()) < 1e-14, "t = {t}");
    }
}

#[test]
fn linbreg_on_a_quadratic_reaches_a_sparse_fixed_point() {
    // θ = prox(v) and v moves by −lr·∇f(θ): coordinates whose centre is small
    // stay at exactly zero forever because their gradient pushes v back.
    let q = Quadratic {
        a: vec![1.0; 6],
        c: vec![3.0, -2.0, 0.0, 0.0, 1.5, 0.0],
    };
    let traj = crate_trajectory(Algorithm::LinBreg, 0.1, 0.5, &q, &[0.0; 6], 2000);
    let last = traj.last().unwrap();
    assert_eq!(support(last), vec![0, 1, 4]);
    assert!(max_abs_diff(last, &q.c) < 1e-9);
}

#[test]
fn adabreg_recovers_sparse_logistic_support() {
    for seed in 0..5 {
        let mut train = Logistic::generate(600, 20, 5, seed);
        let heldout = train.split_off(200);
        let (_, w) = select_lambda(&heldout, &[0.25, 0.5, 1.0, 2.0, 4.0], |l| {
            adabreg_logistic(&train, l, 0.01, 20, 10, seed)
        });
        let found = support(&w);
        let informative = train.informative();
        assert!(
            informative.iter().all(|j| found.contains(j)),
            "seed {seed}: {found:?}"
        );
        assert!(
            found.len() - informative.len() <= 3,
            "seed {seed}: {found:?}"
        );
    }
}

#[test]
fn ista_reference_recovers_informative_features() {
    let mut train = Logistic::generate(600, 20, 5, 0);
    let heldout = train.split_off(200);
    let (_, w) = select_lambda(&heldout, &[0.01, 0.02, 0.04, 0.08, 0.16], |mu| {
        ista(&train, mu, 3000)
    });
    let found = support(&w);
    assert!(train.informative().iter().all(|j| found.contains(j)));
}
