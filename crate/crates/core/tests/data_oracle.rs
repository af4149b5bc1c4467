//! The pattern task is learnable: a nearest-template classifier built from
//! the generator's own templates labels almost every sample correctly.

use breg_snn::data::{gen_pattern_task, pattern_templates, PatternTask};
use breg_snn::Rng;

#[test]
fn nearest_template_classifies_pattern_task() {
    let task = PatternTask::default();
    let ds = gen_pattern_task(&mut Rng::new(5), &task).unwrap();
    let templates = pattern_templates(&mut Rng::new(5), &task).unwrap();
    // Poisson log-likelihood up to terms independent of the class.
    let score = |x: &[f64], rate: &[f64]| -> f64 {
        x.iter()
            .zip(rate)
            .map(|(k, r)| k * r.max(1e-12).ln() - r)
            .sum()
    };
    let mut correct = 0;
    for i in 0..ds.len() {
        let x = ds.sample(i).data();
        let best = (0..templates.len())
            .max_by(|&a, &b| {
                score(x, templates[a].data()).total_cmp(&score(x, templates[b].data()))
            })
            .unwrap();
        correct += (best == ds.label(i)) as usize;
    }
    let acc = correct as f64 / ds.len() as f64;
    assert!(acc > 0.95, "accuracy {acc}");
}
