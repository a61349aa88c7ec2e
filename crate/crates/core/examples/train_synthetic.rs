// Trains the multi-task model and a selection-only baseline on a synthetic
// corpus with planted positives, then reports held-out quality for both.

use std::time::Instant;

use extsumm::analysis::held_out_metrics;
use extsumm::model::ModelConfig;
use extsumm::oracle::{label_corpus, GainMetric, OracleConfig, PerDatasetConfig};
use extsumm::synth::{gen_synthetic_docs, SynthConfig};
use extsumm::trainer::{select_best, train, TrainConfig};
use extsumm::{Document, Summarizer};

fn corpus(num_docs: usize, seed: u64) -> extsumm::Result<Vec<Document>> {
    let cfg = SynthConfig::new(num_docs, 12, 7, seed);
    let mut docs = gen_synthetic_docs(&cfg)?;
    let oracle = OracleConfig::new(cfg.planted_per_doc, GainMetric::MeanRg1Rg2, false)?;
    label_corpus(&mut docs, &PerDatasetConfig::uniform(oracle))?;
    Ok(docs)
}

pub fn run_example() -> extsumm::Result<()> {
    let steps: usize = std::env::var("EXTSUMM_EXAMPLE_STEPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(300);
    let train_docs = corpus(500, 1)?;
    let val_docs = corpus(100, 2)?;
    let out = std::env::temp_dir().join(format!("extsumm-train-example-{}", std::process::id()));

    for alpha in [0.5, 1.0] {
        let model_cfg = ModelConfig {
            d: 64,
            n_context_layers: 2,
            alpha,
            ..ModelConfig::default()
        };
        let train_cfg = TrainConfig {
            max_steps: steps,
            val_interval: (steps / 4).max(1),
            top_k: 3,
            ..TrainConfig::default()
        };
        let started = Instant::now();
        let dir = out.join(format!("alpha-{alpha}"));
        let report = train(&train_docs, &val_docs, &model_cfg, &train_cfg, &dir)?;
        let best = select_best(&report.checkpoints)?;
        let (model, _) = Summarizer::load(&best.path)?;
        let m = held_out_metrics(&model, &val_docs, 3)?;
        println!(
            "alpha={alpha} steps={steps} best_step={} val={:.4} sel_f1={:.3} sec_acc={:.3} p_true_sec={:.3} ({:.1}s)",
            best.step,
            best.val_metric,
            m.selection_f1,
            m.section_accuracy,
            m.mean_true_section_prob,
            started.elapsed().as_secs_f64()
        );
    }
    std::fs::remove_dir_all(&out).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() -> extsumm::Result<()> {
    run_example()
}
