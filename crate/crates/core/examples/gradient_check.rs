// Joint selection/section loss on a tiny model and a finite-difference check
// of the analytic gradient for every parameter tensor.

use extsumm::model::{batch_loss, batch_loss_and_grad, DocInput, Example, ModelConfig, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> extsumm::Result<()> {
    let cfg = ModelConfig {
        d: 8,
        vocab_size: 10,
        n_context_layers: 1,
        n_heads: 2,
        max_sentences: 4,
        dropout: 0.0,
        ..ModelConfig::default()
    };
    let params = Params::init(&cfg, &mut ChaCha8Rng::seed_from_u64(7));
    let batch = vec![Example {
        input: DocInput {
            sentences: vec![vec![1, 2, 3], vec![4, 5], vec![6, 7, 8, 9]],
        },
        select_labels: vec![true, false, true],
        section_labels: vec![0, 2, 4],
    }];

    let (loss, grads) = batch_loss_and_grad(&params, &cfg, &batch, None)?;
    println!(
        "L_select {:.6}  L_section {:.6}  total {:.6}",
        loss.selection, loss.section, loss.total
    );

    let h = 1e-5;
    let mut probe = params.clone();
    for (ti, (name, grad)) in grads.tensors().into_iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (j, &a) in grad.iter().enumerate() {
            let orig = probe.tensors()[ti].1.as_slice().unwrap()[j];
            let mut at = |v: f64| -> extsumm::Result<f64> {
                probe.tensors_mut()[ti].1.as_slice_mut().unwrap()[j] = v;
                Ok(batch_loss(&probe, &cfg, &batch, None)?.total)
            };
            let numeric = (at(orig + h)? - at(orig - h)?) / (2.0 * h);
            at(orig)?;
            let scale = a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / scale);
        }
        println!(
            "{name:<14} {:>4} entries  max rel err {worst:.2e}",
            grad.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> extsumm::Result<()> {
    run_example()
}
