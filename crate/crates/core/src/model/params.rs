use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::ModelConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub wq: Array2<f64>,
    pub wk: Array2<f64>,
    pub wv: Array2<f64>,
    pub wo: Array2<f64>,
    pub bq: Array1<f64>,
    pub bk: Array1<f64>,
    pub bv: Array1<f64>,
    pub bo: Array1<f64>,
    pub ln_gamma: Array1<f64>,
    pub ln_beta: Array1<f64>,
}

/// Every trainable tensor. Gradients and optimizer moments reuse this type.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub tok_emb: Array2<f64>,
    pub pos_emb: Array2<f64>,
    pub layers: Vec<LayerParams>,
    pub sel_w: Array1<f64>,
    pub sel_b: Array1<f64>,
    pub sec_w: Array2<f64>,
    pub sec_b: Array1<f64>,
}

fn normal2(rng: &mut impl Rng, rows: usize, cols: usize, std: f64) -> Array2<f64> {
    let dist = Normal::new(0.0, std).expect("finite std");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

fn normal1(rng: &mut impl Rng, len: usize, std: f64) -> Array1<f64> {
    let dist = Normal::new(0.0, std).expect("finite std");
    Array1::from_shape_simple_fn(len, || dist.sample(rng))
}

impl Params {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let d = cfg.d;
        let layer = LayerParams {
            wq: Array2::zeros((d, d)),
            wk: Array2::zeros((d, d)),
            wv: Array2::zeros((d, d)),
            wo: Array2::zeros((d, d)),
            bq: Array1::zeros(d),
            bk: Array1::zeros(d),
            bv: Array1::zeros(d),
            bo: Array1::zeros(d),
            ln_gamma: Array1::zeros(d),
            ln_beta: Array1::zeros(d),
        };
        Params {
            tok_emb: Array2::zeros((cfg.vocab_size, d)),
            pos_emb: Array2::zeros((cfg.max_sentences, d)),
            layers: vec![layer; cfg.n_context_layers],
            sel_w: Array1::zeros(d),
            sel_b: Array1::zeros(1),
            sec_w: Array2::zeros((d, cfg.sections)),
            sec_b: Array1::zeros(cfg.sections),
        }
    }

    /// Random initialization. Both heads start near zero so the section
    /// head's untrained output is close to uniform.
    pub fn init(cfg: &ModelConfig, rng: &mut impl Rng) -> Self {
        let d = cfg.d;
        let w_std = 1.0 / (d as f64).sqrt();
        let tok_emb = normal2(rng, cfg.vocab_size, d, 0.5);
        let pos_emb = normal2(rng, cfg.max_sentences, d, 0.1);
        let layers = (0..cfg.n_context_layers)
            .map(|_| LayerParams {
                wq: normal2(rng, d, d, w_std),
                wk: normal2(rng, d, d, w_std),
                wv: normal2(rng, d, d, w_std),
                wo: normal2(rng, d, d, w_std),
                bq: Array1::zeros(d),
                bk: Array1::zeros(d),
                bv: Array1::zeros(d),
                bo: Array1::zeros(d),
                ln_gamma: Array1::ones(d),
                ln_beta: Array1::zeros(d),
            })
            .collect();
        Params {
            tok_emb,
            pos_emb,
            layers,
            sel_w: normal1(rng, d, 0.02),
            sel_b: Array1::zeros(1),
            sec_w: normal2(rng, d, cfg.sections, 0.02),
            sec_b: Array1::zeros(cfg.sections),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill(0.0);
        z
    }

    pub fn fill(&mut self, value: f64) {
        for (_, mut t) in self.tensors_mut() {
            t.fill(value);
        }
    }

    pub fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        let mut out = vec![
            ("tok_emb".to_string(), self.tok_emb.view().into_dyn()),
            ("pos_emb".to_string(), self.pos_emb.view().into_dyn()),
        ];
        for (l, layer) in self.layers.iter().enumerate() {
            for (name, t) in [
                ("wq", layer.wq.view().into_dyn()),
                ("wk", layer.wk.view().into_dyn()),
                ("wv", layer.wv.view().into_dyn()),
                ("wo", layer.wo.view().into_dyn()),
                ("bq", layer.bq.view().into_dyn()),
                ("bk", layer.bk.view().into_dyn()),
                ("bv", layer.bv.view().into_dyn()),
                ("bo", layer.bo.view().into_dyn()),
                ("ln_gamma", layer.ln_gamma.view().into_dyn()),
                ("ln_beta", layer.ln_beta.view().into_dyn()),
            ] {
                out.push((format!("layer{l}.{name}"), t));
            }
        }
        out.extend([
            ("sel_w".to_string(), self.sel_w.view().into_dyn()),
            ("sel_b".to_string(), self.sel_b.view().into_dyn()),
            ("sec_w".to_string(), self.sec_w.view().into_dyn()),
            ("sec_b".to_string(), self.sec_b.view().into_dyn()),
        ]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        let mut out = vec![
            ("tok_emb".to_string(), self.tok_emb.view_mut().into_dyn()),
            ("pos_emb".to_string(), self.pos_emb.view_mut().into_dyn()),
        ];
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (name, t) in [
                ("wq", layer.wq.view_mut().into_dyn()),
                ("wk", layer.wk.view_mut().into_dyn()),
                ("wv", layer.wv.view_mut().into_dyn()),
                ("wo", layer.wo.view_mut().into_dyn()),
                ("bq", layer.bq.view_mut().into_dyn()),
                ("bk", layer.bk.view_mut().into_dyn()),
                ("bv", layer.bv.view_mut().into_dyn()),
                ("bo", layer.bo.view_mut().into_dyn()),
                ("ln_gamma", layer.ln_gamma.view_mut().into_dyn()),
                ("ln_beta", layer.ln_beta.view_mut().into_dyn()),
            ] {
                out.push((format!("layer{l}.{name}"), t));
            }
        }
        out.extend([
            ("sel_w".to_string(), self.sel_w.view_mut().into_dyn()),
            ("sel_b".to_string(), self.sel_b.view_mut().into_dyn()),
            ("sec_w".to_string(), self.sec_w.view_mut().into_dyn()),
            ("sec_b".to_string(), self.sec_b.view_mut().into_dyn()),
        ]);
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Global L2 norm over all tensors.
    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.iter().copied().collect::<Vec<_>>())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, mut t) in self.tensors_mut() {
            t.mapv_inplace(|x| x * factor);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }
}
