//! BPTT through a feedforward, a recurrent and a readout layer, checked
//! against central finite differences in the smooth (soft) mode.

use breg_snn::snn::{LayerSpec, Mode, Network, NetworkSpec};
use breg_snn::train::cross_entropy;
use breg_snn::{Result, Rng, Tensor};

fn loss(net: &Network, x: &Tensor, label: usize) -> Result<f64> {
    let (logits, _) = net.forward_with(x, Mode::Soft)?;
    Ok(cross_entropy(&logits, label)?.0)
}

pub fn run_example() -> Result<()> {
    let mut rng = Rng::new(0);
    let spec = NetworkSpec::new(vec![
        LayerSpec::feedforward(4, 5),
        LayerSpec::recurrent(5, 6),
        LayerSpec::readout(6, 3),
    ])?;
    let mut net = Network::build(spec, &mut rng)?;
    for g in net.groups_mut() {
        *g = g.scale(3.0);
    }
    let x = Tensor::rand_uniform(&mut rng, &[10, 4], 0.0, 2.0)?.map(f64::round);
    let label = 1;

    let (logits, state) = net.forward_with(&x, Mode::Soft)?;
    let (_, dlogits) = cross_entropy(&logits, label)?;
    let grads = net.backward(&state, &dlogits)?;
    let h = 1e-5;
    for (gi, name) in net.group_names().iter().enumerate() {
        let mut worst = 0.0f64;
        for k in 0..grads.groups[gi].len() {
            let mut plus = net.clone();
            plus.groups_mut()[gi].data_mut()[k] += h;
            let mut minus = net.clone();
            minus.groups_mut()[gi].data_mut()[k] -= h;
            let numeric = (loss(&plus, &x, label)? - loss(&minus, &x, label)?) / (2.0 * h);
            let analytic = grads.groups[gi].data()[k];
            worst =
                worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6));
        }
        println!("{name:<10} max relative error {worst:.2e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
