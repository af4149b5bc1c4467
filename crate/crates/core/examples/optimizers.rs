//! SGD, Adam, LinBreg and AdaBreg on a quadratic whose minimiser is sparse.
//!
//! The Bregman methods keep exact zeros on the coordinates whose optimum is
//! zero; the dense methods only get close.

use breg_snn::bregman::ProxSpec;
use breg_snn::optim::{Algorithm, OptimConfig, Optimizer, ParamState};
use breg_snn::{Result, Tensor};

const TARGET: [f64; 6] = [2.0, 0.0, -1.5, 0.0, 0.0, 0.7];

fn grad(theta: &Tensor) -> Tensor {
    Tensor::from_vec(
        theta
            .data()
            .iter()
            .zip(TARGET)
            .map(|(t, c)| t - c)
            .collect(),
    )
}

pub fn run_example() -> Result<()> {
    let init = Tensor::from_vec(vec![0.3, -0.2, 0.1, 0.25, -0.05, 0.0]);
    for (alg, lr) in [
        (Algorithm::Sgd, 0.1),
        (Algorithm::Adam, 0.05),
        (Algorithm::LinBreg, 0.1),
        (Algorithm::AdaBreg, 0.05),
    ] {
        let opt = Optimizer::new(OptimConfig::new(alg, lr))?;
        let prox = if alg.is_bregman() {
            ProxSpec::l1(0.3)?
        } else {
            ProxSpec::none()
        };
        let mut st = ParamState::new(init.clone(), prox, alg.is_bregman());
        for _ in 0..300 {
            let g = grad(&st.theta);
            opt.step(&mut st, &g, lr)?;
        }
        let shown: Vec<String> = st.theta.data().iter().map(|x| format!("{x:+.4}")).collect();
        println!(
            "{alg:>8}: θ = [{}]  non-zeros {}",
            shown.join(", "),
            st.theta.count_nonzero()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
