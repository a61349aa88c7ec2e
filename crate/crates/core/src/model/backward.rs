//! Exact gradients of the multi-task loss for a batch of documents.

use ndarray::{s, Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::forward::{bce_sum, ce_sum, forward, DocInput, ForwardCache, PROB_EPS};
use super::params::Params;
use super::ModelConfig;
use crate::error::{Error, Result};

/// One training document after vocabulary lookup and truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: DocInput,
    pub select_labels: Vec<bool>,
    pub section_labels: Vec<usize>,
}

impl Example {
    fn check(&self, sections: usize) -> Result<()> {
        let m = self.input.len();
        for (what, len) in [
            ("selection labels vs sentences", self.select_labels.len()),
            ("section labels vs sentences", self.section_labels.len()),
        ] {
            if len != m {
                return Err(Error::LengthMismatch {
                    what,
                    left: len,
                    right: m,
                });
            }
        }
        if let Some(&label) = self.section_labels.iter().find(|&&l| l >= sections) {
            return Err(Error::LabelOutOfRange { label, sections });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    /// Selection BCE averaged over every sentence in the batch.
    pub selection: f64,
    /// Section cross-entropy averaged over every sentence in the batch.
    pub section: f64,
    pub total: f64,
}

fn run_forward(
    params: &Params,
    cfg: &ModelConfig,
    batch: &[Example],
    dropout_seed: Option<u64>,
) -> Result<(Vec<ForwardCache>, LossParts, usize)> {
    let mut rng = dropout_seed.map(ChaCha8Rng::seed_from_u64);
    let mut caches = Vec::with_capacity(batch.len());
    let (mut bce, mut ce, mut n) = (0.0, 0.0, 0usize);
    for ex in batch {
        ex.check(cfg.sections)?;
        let cache = forward(params, cfg, &ex.input, rng.as_mut())?;
        bce += bce_sum(
            cache.preds.select_probs.as_slice().expect("contiguous"),
            &ex.select_labels,
        );
        ce += ce_sum(&cache.preds.section_dists, &ex.section_labels)?;
        n += ex.input.len();
        caches.push(cache);
    }
    let parts = if n == 0 {
        LossParts::default()
    } else {
        let nf = n as f64;
        let (l1, l2) = (bce / nf, ce / nf);
        LossParts {
            selection: l1,
            section: l2,
            total: cfg.alpha * l1 + (1.0 - cfg.alpha) * l2,
        }
    };
    Ok((caches, parts, n))
}

/// Loss only. With `dropout_seed` the same masks as the gradient call are drawn.
pub fn batch_loss(
    params: &Params,
    cfg: &ModelConfig,
    batch: &[Example],
    dropout_seed: Option<u64>,
) -> Result<LossParts> {
    Ok(run_forward(params, cfg, batch, dropout_seed)?.1)
}

pub fn batch_loss_and_grad(
    params: &Params,
    cfg: &ModelConfig,
    batch: &[Example],
    dropout_seed: Option<u64>,
) -> Result<(LossParts, Params)> {
    let (caches, parts, n) = run_forward(params, cfg, batch, dropout_seed)?;
    let mut grads = params.zeros_like();
    if n == 0 {
        return Ok((parts, grads));
    }
    let c_sel = cfg.alpha / n as f64;
    let c_sec = (1.0 - cfg.alpha) / n as f64;
    for (ex, cache) in batch.iter().zip(&caches) {
        backward_doc(params, cfg, ex, cache, c_sel, c_sec, &mut grads);
    }
    Ok((parts, grads))
}

fn col_sum(a: &Array2<f64>) -> Array1<f64> {
    a.sum_axis(Axis(0))
}

fn backward_doc(
    params: &Params,
    cfg: &ModelConfig,
    ex: &Example,
    cache: &ForwardCache,
    c_sel: f64,
    c_sec: f64,
    grads: &mut Params,
) {
    let m = ex.input.len();
    let enc = &cache.enc;

    // Selection head; the clamp is flat outside [ε, 1−ε].
    let d_sel = Array1::from_shape_fn(m, |i| {
        let p = cache.sigmoid[i];
        if c_sel == 0.0 || !(PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
            0.0
        } else {
            c_sel * (p - f64::from(u8::from(ex.select_labels[i])))
        }
    });
    grads.sel_w += &enc.t().dot(&d_sel);
    grads.sel_b[0] += d_sel.sum();

    // Section head: softmax + cross-entropy.
    let mut d_sec = cache.preds.section_dists.clone();
    for (i, &label) in ex.section_labels.iter().enumerate() {
        let mut row = d_sec.row_mut(i);
        if c_sec == 0.0 || row[label] < PROB_EPS {
            row.fill(0.0);
        } else {
            row[label] -= 1.0;
            row *= c_sec;
        }
    }
    grads.sec_w += &enc.t().dot(&d_sec);
    grads.sec_b += &col_sum(&d_sec);

    let mut d_h = d_sel
        .view()
        .insert_axis(Axis(1))
        .dot(&params.sel_w.view().insert_axis(Axis(0)))
        + d_sec.dot(&params.sec_w.t());

    let dh = cfg.d / cfg.n_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    for (l, lc) in cache.layers.iter().enumerate().rev() {
        let lp = &params.layers[l];
        let lg = &mut grads.layers[l];

        lg.ln_gamma += &(&d_h * &lc.xhat).sum_axis(Axis(0));
        lg.ln_beta += &d_h.sum_axis(Axis(0));
        let dxhat = &d_h * &lp.ln_gamma;
        let mean_dxhat = dxhat.mean_axis(Axis(1)).expect("d > 0");
        let mean_dxhat_xhat = (&dxhat * &lc.xhat).mean_axis(Axis(1)).expect("d > 0");
        let dz = (&dxhat
            - &mean_dxhat.view().insert_axis(Axis(1))
            - &lc.xhat * &mean_dxhat_xhat.view().insert_axis(Axis(1)))
            * lc.inv_std.view().insert_axis(Axis(1));

        let d_out = match &lc.drop_mask {
            Some(mask) => &dz * mask,
            None => dz.clone(),
        };
        lg.wo += &lc.concat.t().dot(&d_out);
        lg.bo += &col_sum(&d_out);
        let d_concat = d_out.dot(&lp.wo.t());

        let mut dq = Array2::zeros((m, cfg.d));
        let mut dk = Array2::zeros((m, cfg.d));
        let mut dv = Array2::zeros((m, cfg.d));
        for (head, p) in lc.attn.iter().enumerate() {
            let cols = s![.., head * dh..(head + 1) * dh];
            let d_a = d_concat.slice(cols);
            let d_p = d_a.dot(&lc.v.slice(cols).t());
            dv.slice_mut(cols).assign(&p.t().dot(&d_a));
            let row_dot = (&d_p * p).sum_axis(Axis(1));
            let d_scores = (p * &(&d_p - &row_dot.view().insert_axis(Axis(1)))) * scale;
            dq.slice_mut(cols).assign(&d_scores.dot(&lc.k.slice(cols)));
            dk.slice_mut(cols)
                .assign(&d_scores.t().dot(&lc.q.slice(cols)));
        }
        let x_t = lc.input.t();
        lg.wq += &x_t.dot(&dq);
        lg.wk += &x_t.dot(&dk);
        lg.wv += &x_t.dot(&dv);
        lg.bq += &col_sum(&dq);
        lg.bk += &col_sum(&dk);
        lg.bv += &col_sum(&dv);

        d_h = dz + dq.dot(&lp.wq.t()) + dk.dot(&lp.wk.t()) + dv.dot(&lp.wv.t());
    }

    if let Some(mask) = &cache.embed_mask {
        d_h = &d_h * mask;
    }
    for (i, ids) in ex.input.sentences.iter().enumerate() {
        let row = d_h.row(i);
        let mut pos = grads.pos_emb.row_mut(i);
        pos += &row;
        if !ids.is_empty() {
            let inv = 1.0 / ids.len() as f64;
            for &id in ids {
                grads.tok_emb.row_mut(id).scaled_add(inv, &row);
            }
        }
    }
}
