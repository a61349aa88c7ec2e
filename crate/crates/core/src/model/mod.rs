//! Toy-scale sentence encoder with selection and section-prediction heads.
//!
//! Sentences are represented by the mean of their token embeddings plus a
//! learned position embedding, then passed through a stack of multi-head
//! self-attention layers over sentences (residual + layer norm). A sigmoid
//! head scores each sentence for extraction and a softmax head predicts its
//! section category. Training minimizes `α·L_select + (1−α)·L_section`.

mod backward;
mod checkpoint;
mod forward;
mod params;
mod vocab;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use backward::{batch_loss, batch_loss_and_grad, Example, LossParts};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT};
pub use forward::{
    encode, loss_multi, loss_section, loss_selection, predict, section_head, select_head, sigmoid,
    softmax_rows, DocInput, Predictions, SentenceEncodings, LN_EPS, PROB_EPS,
};
pub use params::{LayerParams, Params};
pub use vocab::{Vocab, UNK};

use crate::corpus::{Document, SectionCategory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d: usize,
    pub vocab_size: usize,
    pub n_context_layers: usize,
    pub n_heads: usize,
    /// Number of section categories.
    pub sections: usize,
    pub alpha: f64,
    pub max_sentences: usize,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d: 64,
            vocab_size: 5000,
            n_context_layers: 2,
            n_heads: 4,
            sections: SectionCategory::COUNT,
            alpha: 0.5,
            max_sentences: 64,
            dropout: 0.1,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if self.d == 0 || self.n_heads == 0 || !self.d.is_multiple_of(self.n_heads) {
            return Err(Error::config(format!(
                "d = {} must be a positive multiple of n_heads = {}",
                self.d, self.n_heads
            )));
        }
        if self.vocab_size == 0 || self.sections == 0 || self.max_sentences == 0 {
            return Err(Error::config(
                "vocab_size, sections and max_sentences must be positive",
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

/// A trained (or freshly initialized) model together with its vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Summarizer {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: Params,
}

impl Summarizer {
    /// Seeded initialization; `config.vocab_size` is taken from `vocab`.
    pub fn new(mut config: ModelConfig, vocab: Vocab) -> Result<Self> {
        config.vocab_size = vocab.len();
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = Params::init(&config, &mut rng);
        Ok(Summarizer {
            config,
            vocab,
            params,
        })
    }

    /// Token ids of the first `max_sentences` sentences.
    pub fn doc_input(&self, doc: &Document) -> DocInput {
        DocInput {
            sentences: doc
                .sentences
                .iter()
                .take(self.config.max_sentences)
                .map(|s| self.vocab.encode(&s.tokens))
                .collect(),
        }
    }

    /// Eval-mode predictions for the scored prefix of the document.
    pub fn predict(&self, doc: &Document) -> Result<Predictions> {
        if doc.sentences.is_empty() {
            return Err(Error::EmptyDocument(doc.id.clone()));
        }
        predict(&self.params, &self.config, &self.doc_input(doc))
    }

    /// Training example; labels beyond `max_sentences` are dropped with their sentences.
    pub fn example(&self, doc: &Document) -> Result<Example> {
        let labels = doc
            .oracle_labels()
            .ok_or_else(|| Error::MissingLabels(doc.id.clone()))?;
        let m = doc.sentences.len().min(self.config.max_sentences);
        let section_labels = doc
            .sentences
            .iter()
            .take(m)
            .map(|s| s.section_category.index())
            .collect();
        Ok(Example {
            input: self.doc_input(doc),
            select_labels: labels[..m].to_vec(),
            section_labels,
        })
    }

    pub fn save(&self, path: &Path, step: u64) -> Result<()> {
        Checkpoint::from_summarizer(self, step).write(path)
    }

    pub fn load(path: &Path) -> Result<(Self, u64)> {
        let ckpt = Checkpoint::read(path)?;
        let step = ckpt.step;
        Ok((ckpt.into_summarizer(path)?, step))
    }
}
