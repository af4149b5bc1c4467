//! The l1 proximal map, its sub-gradient and the Bregman distance it induces.

use breg_snn::bregman::{bregman_distance, soft_threshold, subgradient_l1, ProxSpec};
use breg_snn::{Result, Tensor};

pub fn run_example() -> Result<()> {
    let v = Tensor::from_vec(vec![-2.0, -0.5, 0.0, 0.3, 1.0, 3.0]);
    let lambda = 0.5;
    let theta = soft_threshold(&v, lambda)?;
    println!("v           {:?}", v.data());
    println!("prox(v)     {:?}", theta.data());
    println!("∂J(prox v)  {:?}", subgradient_l1(&theta, lambda).data());

    let j = ProxSpec::l1(lambda)?;
    let x = Tensor::from_vec(vec![1.0, -1.0, 0.0]);
    for y in [
        Tensor::from_vec(vec![2.0, -0.5, 0.0]),
        Tensor::from_vec(vec![-1.0, 1.0, 0.0]),
        Tensor::from_vec(vec![0.0, 0.0, 0.0]),
    ] {
        println!("D_J(x, {:?}) = {}", y.data(), bregman_distance(&j, &x, &y)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
