//! A single leaky integrate-and-fire neuron driven by a constant current,
//! with the surrogate derivative the backward pass uses.

use breg_snn::snn::{lif_step, surrogate_grad, LifParams};
use breg_snn::{Result, Tensor};

pub fn run_example() -> Result<()> {
    let p = LifParams::default();
    let mut u = Tensor::zeros(&[1]);
    let input = Tensor::from_vec(vec![0.35]);
    println!("β = {}, threshold = {}, input 0.35", p.beta, p.threshold);
    for t in 0..15 {
        let (next, spike) = lif_step(&u, &input, &p)?;
        let pre = p.beta * u.data()[0] + input.data()[0];
        let sg = surrogate_grad(
            &Tensor::from_vec(vec![pre - p.threshold]),
            p.surrogate_slope,
        );
        println!(
            "t={t:>2} u'={pre:.3} spike={} u={:.3} surrogate={:.3}",
            spike.data()[0],
            next.data()[0],
            sg.data()[0]
        );
        u = next;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
