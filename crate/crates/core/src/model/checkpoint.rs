use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::ArrayD;
use serde::{Deserialize, Serialize};

use super::{ModelConfig, Params, Summarizer, Vocab};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "extsumm-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// JSON container: format tag, config, vocabulary, training step and every tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub step: u64,
    pub config: ModelConfig,
    pub vocab: Vec<String>,
    pub tensors: Vec<TensorEntry>,
}

impl Checkpoint {
    pub fn from_summarizer(model: &Summarizer, step: u64) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            step,
            config: model.config.clone(),
            vocab: model.vocab.tokens().to_vec(),
            tensors: model
                .params
                .tensors()
                .into_iter()
                .map(|(name, t)| TensorEntry {
                    name,
                    shape: t.shape().to_vec(),
                    data: t.iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, self)?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Checkpoint {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint {
                path: path.to_path_buf(),
                reason: format!("unsupported format tag {:?}", ckpt.format),
            });
        }
        Ok(ckpt)
    }

    pub fn into_summarizer(self, path: &Path) -> Result<Summarizer> {
        let bad = |reason: String| Error::Checkpoint {
            path: path.to_path_buf(),
            reason,
        };
        self.config.validate()?;
        let vocab = Vocab::from_tokens(self.vocab);
        if vocab.len() != self.config.vocab_size {
            return Err(bad(format!(
                "vocabulary has {} entries, config says {}",
                vocab.len(),
                self.config.vocab_size
            )));
        }
        let mut params = Params::zeros(&self.config);
        {
            let mut slots = params.tensors_mut();
            if slots.len() != self.tensors.len() {
                return Err(bad(format!(
                    "expected {} tensors, found {}",
                    slots.len(),
                    self.tensors.len()
                )));
            }
            for ((name, slot), entry) in slots.iter_mut().zip(self.tensors) {
                if *name != entry.name || slot.shape() != entry.shape.as_slice() {
                    return Err(bad(format!(
                        "tensor {} {:?} does not match expected {} {:?}",
                        entry.name,
                        entry.shape,
                        name,
                        slot.shape()
                    )));
                }
                let array = ArrayD::from_shape_vec(entry.shape, entry.data)
                    .map_err(|e| bad(format!("tensor {name}: {e}")))?;
                slot.assign(&array);
            }
        }
        Ok(Summarizer {
            config: self.config,
            vocab,
            params,
        })
    }
}
