//! Mini-batch training with periodic validation and checkpoint selection.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::inference::{extract_summary, SentenceScorer};
use crate::model::{
    batch_loss, batch_loss_and_grad, Example, ModelConfig, Params, Summarizer, Vocab,
};
use crate::rouge::{rouge_l, rouge_n};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_docs: usize,
    pub max_steps: usize,
    pub val_interval: usize,
    pub grad_clip_norm: Option<f64>,
    pub seed: u64,
    /// Sentences extracted per validation document.
    pub top_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 2e-3,
            batch_docs: 8,
            max_steps: 1000,
            val_interval: 100,
            grad_clip_norm: Some(1.0),
            seed: 0,
            top_k: 15,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.lr.is_finite()
            || self.lr <= 0.0
            || self.batch_docs == 0
            || self.val_interval == 0
            || self.top_k == 0
        {
            return Err(Error::config(
                "lr, batch_docs, val_interval and top_k must be positive",
            ));
        }
        if matches!(self.grad_clip_norm, Some(c) if c.is_nan() || c <= 0.0) {
            return Err(Error::config("grad_clip_norm must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointRecord {
    pub step: usize,
    pub path: PathBuf,
    /// Mean over validation documents of (ROUGE-2 F1 + ROUGE-L F1) / 2.
    pub val_metric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsRow {
    pub step: usize,
    /// Eval-mode multi-task loss on a fixed slice of the training set.
    pub train_loss: f64,
    pub val_metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub checkpoints: Vec<CheckpointRecord>,
    pub metrics: Vec<MetricsRow>,
}

impl TrainReport {
    pub fn best(&self) -> Result<&CheckpointRecord> {
        select_best(&self.checkpoints)
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Params,
    v: Params,
}

impl Adam {
    pub fn new(params: &Params, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut Params, grads: &Params) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let (lr, eps) = (self.lr, self.eps);
        let grads = grads.tensors();
        for ((((_, mut p), (_, mut m)), (_, mut v)), (_, g)) in params
            .tensors_mut()
            .into_iter()
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
            .zip(grads)
        {
            let p = p.as_slice_mut().expect("contiguous");
            let m = m.as_slice_mut().expect("contiguous");
            let v = v.as_slice_mut().expect("contiguous");
            let g = g.as_slice().expect("contiguous");
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
        }
    }
}

pub fn checkpoint_path(out_dir: &Path, step: usize) -> PathBuf {
    out_dir.join(format!("ckpt_{step:07}.json"))
}

const MONITOR_DOCS: usize = 64;

/// Trains a fresh model and writes a checkpoint at step 0 and every
/// `val_interval` steps, plus `metrics.csv`, into `out_dir`.
pub fn train(
    corpus_train: &[Document],
    corpus_val: &[Document],
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    out_dir: &Path,
) -> Result<TrainReport> {
    train_config.validate()?;
    if corpus_val.is_empty() {
        return Err(Error::EmptyValidationSet);
    }
    if let Some(doc) = corpus_train.iter().find(|d| d.oracle_labels().is_none()) {
        return Err(Error::MissingLabels(doc.id.clone()));
    }
    if corpus_train.is_empty() {
        return Err(Error::config("training corpus is empty"));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let vocab = Vocab::build(corpus_train, model_config.vocab_size);
    let mut model = Summarizer::new(model_config.clone(), vocab)?;
    let examples: Vec<Example> = corpus_train
        .iter()
        .map(|d| model.example(d))
        .collect::<Result<_>>()?;
    let monitor = &examples[..examples.len().min(MONITOR_DOCS)];

    let mut rng = ChaCha8Rng::seed_from_u64(train_config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0;
    let mut adam = Adam::new(&model.params, train_config.lr);

    let mut report = TrainReport {
        checkpoints: Vec::new(),
        metrics: Vec::new(),
    };
    let mut checkpoint = |model: &Summarizer, step: usize| -> Result<()> {
        let val_metric = validate(model, corpus_val, train_config.top_k)?;
        let train_loss = batch_loss(&model.params, &model.config, monitor, None)?.total;
        let path = checkpoint_path(out_dir, step);
        model.save(&path, step as u64)?;
        report.checkpoints.push(CheckpointRecord {
            step,
            path,
            val_metric,
        });
        report.metrics.push(MetricsRow {
            step,
            train_loss,
            val_metric,
        });
        Ok(())
    };

    checkpoint(&model, 0)?;
    for step in 1..=train_config.max_steps {
        let mut batch = Vec::with_capacity(train_config.batch_docs);
        while batch.len() < train_config.batch_docs.min(examples.len()) {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            batch.push(examples[order[cursor]].clone());
            cursor += 1;
        }
        let dropout_seed = rng.next_u64();
        let (_, mut grads) =
            batch_loss_and_grad(&model.params, &model.config, &batch, Some(dropout_seed))?;
        if let Some(max_norm) = train_config.grad_clip_norm {
            let norm = grads.norm();
            if norm > max_norm {
                grads.scale(max_norm / norm);
            }
        }
        adam.step(&mut model.params, &grads);
        if step % train_config.val_interval == 0 {
            checkpoint(&model, step)?;
        }
    }
    write_metrics(&out_dir.join("metrics.csv"), &report.metrics)?;
    Ok(report)
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// Per-document checkpoint-selection metric: (ROUGE-2 F1 + ROUGE-L F1) / 2.
pub fn doc_val_metric<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> f64 {
    let r2 = rouge_n(candidate, reference, 2).expect("n = 2").f1;
    (r2 + rouge_l(candidate, reference).f1) / 2.0
}

/// Mean per-document selection metric of top-k extracts, no trigram blocking.
pub fn validate<M>(model: &M, corpus_val: &[Document], top_k: usize) -> Result<f64>
where
    M: SentenceScorer + Sync,
{
    if corpus_val.is_empty() {
        return Err(Error::EmptyValidationSet);
    }
    let per_doc: Vec<f64> = corpus_val
        .par_iter()
        .map(|doc| {
            let result = extract_summary(doc, model, top_k, false)?;
            Ok(doc_val_metric(&result.summary_tokens, &doc.summary_tokens))
        })
        .collect::<Result<_>>()?;
    Ok(per_doc.iter().sum::<f64>() / per_doc.len() as f64)
}

/// Loads a checkpoint file and validates it.
pub fn validate_checkpoint(path: &Path, corpus_val: &[Document], top_k: usize) -> Result<f64> {
    let (model, _) = Summarizer::load(path)?;
    validate(&model, corpus_val, top_k)
}

/// Highest validation metric; ties go to the earliest step.
pub fn select_best(records: &[CheckpointRecord]) -> Result<&CheckpointRecord> {
    records
        .iter()
        .fold(None, |best: Option<&CheckpointRecord>, r| match best {
            Some(b) if b.val_metric > r.val_metric => Some(b),
            Some(b) if b.val_metric == r.val_metric && b.step <= r.step => Some(b),
            _ => Some(r),
        })
        .ok_or(Error::NoCheckpoints)
}
