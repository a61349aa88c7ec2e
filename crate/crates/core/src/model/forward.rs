//! Forward pass: sentence encoder, selection head, section head and losses.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::params::{LayerParams, Params};
use super::ModelConfig;
use crate::error::{Error, Result};

/// Probability clamp applied before every logarithm.
pub const PROB_EPS: f64 = 1e-12;
pub const LN_EPS: f64 = 1e-5;

/// Token ids for each sentence of one (possibly truncated) document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocInput {
    pub sentences: Vec<Vec<usize>>,
}

impl DocInput {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// One row per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEncodings(pub Array2<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub select_probs: Array1<f64>,
    /// Shape (m, S); each row sums to one.
    pub section_dists: Array2<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LayerCache {
    pub input: Array2<f64>,
    pub q: Array2<f64>,
    pub k: Array2<f64>,
    pub v: Array2<f64>,
    pub attn: Vec<Array2<f64>>,
    pub concat: Array2<f64>,
    pub drop_mask: Option<Array2<f64>>,
    pub xhat: Array2<f64>,
    pub inv_std: Array1<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    pub embed_mask: Option<Array2<f64>>,
    pub layers: Vec<LayerCache>,
    pub enc: Array2<f64>,
    /// Unclamped sigmoid outputs.
    pub sigmoid: Array1<f64>,
    pub preds: Predictions,
}

fn dropout_mask(rng: &mut impl Rng, shape: (usize, usize), p: f64) -> Array2<f64> {
    let keep = 1.0 / (1.0 - p);
    Array2::from_shape_simple_fn(shape, || if rng.random::<f64>() < p { 0.0 } else { keep })
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
    out
}

/// Mean of token embeddings per sentence plus the position embedding.
pub(crate) fn embed(params: &Params, cfg: &ModelConfig, input: &DocInput) -> Result<Array2<f64>> {
    let m = input.len();
    if m > cfg.max_sentences {
        return Err(Error::LengthMismatch {
            what: "sentences vs max_sentences",
            left: m,
            right: cfg.max_sentences,
        });
    }
    let mut x = Array2::zeros((m, cfg.d));
    for (i, ids) in input.sentences.iter().enumerate() {
        let mut row = x.row_mut(i);
        if !ids.is_empty() {
            let inv = 1.0 / ids.len() as f64;
            for &id in ids {
                if id >= cfg.vocab_size {
                    return Err(Error::VocabOverflow {
                        id,
                        vocab_size: cfg.vocab_size,
                    });
                }
                row.scaled_add(inv, &params.tok_emb.row(id));
            }
        }
        row += &params.pos_emb.row(i);
    }
    Ok(x)
}

/// Multi-head self-attention output (before residual and normalization).
/// Returns (q, k, v, per-head attention, concatenated heads, output).
#[allow(clippy::type_complexity)]
pub(crate) fn attention(
    layer: &LayerParams,
    n_heads: usize,
    h: ArrayView2<f64>,
) -> (
    Array2<f64>,
    Array2<f64>,
    Array2<f64>,
    Vec<Array2<f64>>,
    Array2<f64>,
    Array2<f64>,
) {
    let d = h.ncols();
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let q = h.dot(&layer.wq) + &layer.bq;
    let k = h.dot(&layer.wk) + &layer.bk;
    let v = h.dot(&layer.wv) + &layer.bv;
    let mut concat = Array2::zeros(h.raw_dim());
    let mut attn = Vec::with_capacity(n_heads);
    for head in 0..n_heads {
        let cols = s![.., head * dh..(head + 1) * dh];
        let scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
        let p = softmax_rows(&scores);
        concat.slice_mut(cols).assign(&p.dot(&v.slice(cols)));
        attn.push(p);
    }
    let out = concat.dot(&layer.wo) + &layer.bo;
    (q, k, v, attn, concat, out)
}

/// Row-wise layer normalization; returns (xhat, 1/std).
pub(crate) fn layer_norm(z: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let d = z.ncols() as f64;
    let mean = z.mean_axis(Axis(1)).expect("d > 0");
    let centered = z - &mean.view().insert_axis(Axis(1));
    let var = centered.mapv(|x| x * x).sum_axis(Axis(1)) / d;
    let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
    let xhat = &centered * &inv_std.view().insert_axis(Axis(1));
    (xhat, inv_std)
}

/// Full forward pass. Dropout is applied only when `rng` is given.
pub(crate) fn forward<R: Rng>(
    params: &Params,
    cfg: &ModelConfig,
    input: &DocInput,
    mut rng: Option<&mut R>,
) -> Result<ForwardCache> {
    let mut h = embed(params, cfg, input)?;
    let m = h.nrows();
    let train = rng.is_some() && cfg.dropout > 0.0;

    let embed_mask = if train {
        let mask = dropout_mask(rng.as_deref_mut().expect("train"), (m, cfg.d), cfg.dropout);
        h = &h * &mask;
        Some(mask)
    } else {
        None
    };

    let mut layers = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let (q, k, v, attn, concat, mut out) = attention(layer, cfg.n_heads, h.view());
        let drop_mask = if train {
            let mask = dropout_mask(rng.as_deref_mut().expect("train"), (m, cfg.d), cfg.dropout);
            out = &out * &mask;
            Some(mask)
        } else {
            None
        };
        let z = &h + &out;
        let (xhat, inv_std) = layer_norm(&z);
        let next = &xhat * &layer.ln_gamma + &layer.ln_beta;
        layers.push(LayerCache {
            input: std::mem::replace(&mut h, next),
            q,
            k,
            v,
            attn,
            concat,
            drop_mask,
            xhat,
            inv_std,
        });
    }

    let enc = h;
    let sigmoid_out = (enc.dot(&params.sel_w) + params.sel_b[0]).mapv(sigmoid);
    let select_probs = sigmoid_out.mapv(|p| p.clamp(PROB_EPS, 1.0 - PROB_EPS));
    let section_dists = softmax_rows(&(enc.dot(&params.sec_w) + &params.sec_b));
    Ok(ForwardCache {
        embed_mask,
        layers,
        enc,
        sigmoid: sigmoid_out,
        preds: Predictions {
            select_probs,
            section_dists,
        },
    })
}

/// Eval-mode sentence encodings.
pub fn encode(params: &Params, cfg: &ModelConfig, input: &DocInput) -> Result<SentenceEncodings> {
    Ok(SentenceEncodings(
        forward::<rand_chacha::ChaCha8Rng>(params, cfg, input, None)?.enc,
    ))
}

pub fn predict(params: &Params, cfg: &ModelConfig, input: &DocInput) -> Result<Predictions> {
    Ok(forward::<rand_chacha::ChaCha8Rng>(params, cfg, input, None)?.preds)
}

/// σ(enc·w + b), clamped to [ε, 1−ε].
pub fn select_head(enc: &SentenceEncodings, w: &Array1<f64>, b: f64) -> Array1<f64> {
    (enc.0.dot(w) + b).mapv(|x| sigmoid(x).clamp(PROB_EPS, 1.0 - PROB_EPS))
}

pub fn section_head(enc: &SentenceEncodings, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    softmax_rows(&(enc.0.dot(w) + b))
}

/// Mean binary cross-entropy over all predictions.
pub fn loss_selection(probs: &[f64], labels: &[bool]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "selection probabilities vs labels",
            left: probs.len(),
            right: labels.len(),
        });
    }
    if probs.is_empty() {
        return Ok(0.0);
    }
    Ok(bce_sum(probs, labels) / probs.len() as f64)
}

pub(crate) fn bce_sum(probs: &[f64], labels: &[bool]) -> f64 {
    probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum()
}

/// Mean categorical cross-entropy against one-hot section labels.
pub fn loss_section(dists: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    if dists.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "section rows vs labels",
            left: dists.nrows(),
            right: labels.len(),
        });
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(ce_sum(dists, labels)? / labels.len() as f64)
}

pub(crate) fn ce_sum(dists: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let sections = dists.ncols();
    labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            if label >= sections {
                Err(Error::LabelOutOfRange { label, sections })
            } else {
                Ok(-dists[[i, label]].max(PROB_EPS).ln())
            }
        })
        .sum()
}

/// α·L1 + (1−α)·L2.
pub fn loss_multi(l1: f64, l2: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(alpha * l1 + (1.0 - alpha) * l2)
}
