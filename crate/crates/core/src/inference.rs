//! Summary extraction from per-sentence probabilities.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{Summarizer, PROB_EPS};

/// Anything that assigns an extraction probability to every sentence.
pub trait SentenceScorer {
    fn score(&self, doc: &Document) -> Result<Vec<f64>>;
}

impl SentenceScorer for Summarizer {
    /// Sentences past the model's budget are never scored and get ε.
    fn score(&self, doc: &Document) -> Result<Vec<f64>> {
        let preds = self.predict(doc)?;
        let mut probs = preds.select_probs.to_vec();
        probs.resize(doc.sentences.len(), PROB_EPS);
        Ok(probs)
    }
}

impl<F> SentenceScorer for F
where
    F: Fn(&Document) -> Vec<f64>,
{
    fn score(&self, doc: &Document) -> Result<Vec<f64>> {
        Ok(self(doc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    /// Highest-probability sentences up to `top_k`.
    TopK,
    /// Sentences with probability ≥ the threshold, still capped at `top_k`.
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig {
    pub top_k: usize,
    pub trigram_blocking: bool,
    pub rule: SelectionRule,
}

impl InferenceConfig {
    pub fn top_k(top_k: usize) -> Self {
        InferenceConfig {
            top_k,
            trigram_blocking: false,
            rule: SelectionRule::TopK,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub doc_id: String,
    pub probs: Vec<f64>,
    /// Ascending sentence positions.
    pub selected: Vec<usize>,
    pub summary_text: String,
    pub summary_tokens: Vec<String>,
}

/// One line of prediction output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub probs: Vec<f64>,
    pub selected: Vec<usize>,
    pub summary: String,
}

impl ExtractionResult {
    pub fn to_record(&self) -> PredictionRecord {
        PredictionRecord {
            id: self.doc_id.clone(),
            probs: self.probs.clone(),
            selected: self.selected.clone(),
            summary: self.summary_text.clone(),
        }
    }

    /// Rebuilds a result from a prediction line and the document it refers to.
    pub fn from_record(record: PredictionRecord, doc: &Document) -> Result<Self> {
        if record.id != doc.id {
            return Err(Error::DocMismatch(record.id, doc.id.clone()));
        }
        if record.probs.len() != doc.sentences.len() {
            return Err(Error::LengthMismatch {
                what: "prediction probabilities vs sentences",
                left: record.probs.len(),
                right: doc.sentences.len(),
            });
        }
        if let Some(&bad) = record.selected.iter().find(|&&p| p >= doc.sentences.len()) {
            return Err(Error::MalformedRecord {
                doc_id: Some(doc.id.clone()),
                reason: format!("selected position {bad} out of range"),
            });
        }
        let mut selected = record.selected;
        selected.sort_unstable();
        selected.dedup();
        Ok(ExtractionResult {
            doc_id: record.id,
            summary_tokens: doc.tokens_of(&selected),
            summary_text: record.summary,
            probs: record.probs,
            selected,
        })
    }
}

/// Positions by descending probability, ties to the lower position.
pub fn rank_positions(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order
}

fn trigrams<S: AsRef<str>>(tokens: &[S]) -> impl Iterator<Item = [&str; 3]> {
    tokens
        .windows(3)
        .map(|w| [w[0].as_ref(), w[1].as_ref(), w[2].as_ref()])
}

/// True iff some contiguous three-token sequence occurs in both.
pub fn has_shared_trigram<S: AsRef<str>>(candidate: &[S], accepted: &[S]) -> bool {
    let seen: HashSet<[&str; 3]> = trigrams(accepted).collect();
    trigrams(candidate).any(|t| seen.contains(&t))
}

/// Walks the probability ranking and returns the accepted positions in document order.
pub fn select_sentences(doc: &Document, probs: &[f64], cfg: &InferenceConfig) -> Vec<usize> {
    let mut accepted: Vec<usize> = Vec::new();
    let mut seen: HashSet<[&str; 3]> = HashSet::new();
    for pos in rank_positions(probs) {
        if accepted.len() >= cfg.top_k {
            break;
        }
        if let SelectionRule::Threshold(t) = cfg.rule {
            if probs[pos] < t {
                break;
            }
        }
        let tokens = &doc.sentences[pos].tokens;
        if cfg.trigram_blocking {
            if trigrams(tokens).any(|t| seen.contains(&t)) {
                continue;
            }
            seen.extend(trigrams(tokens));
        }
        accepted.push(pos);
    }
    accepted.sort_unstable();
    accepted
}

pub fn extract_with(
    doc: &Document,
    scorer: &impl SentenceScorer,
    cfg: &InferenceConfig,
) -> Result<ExtractionResult> {
    if doc.sentences.is_empty() {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    if cfg.top_k == 0 {
        return Err(Error::config("top_k must be >= 1"));
    }
    let probs = scorer.score(doc)?;
    if probs.len() != doc.sentences.len() {
        return Err(Error::LengthMismatch {
            what: "scores vs sentences",
            left: probs.len(),
            right: doc.sentences.len(),
        });
    }
    let selected = select_sentences(doc, &probs, cfg);
    let summary_text = selected
        .iter()
        .map(|&p| doc.sentences[p].text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(ExtractionResult {
        doc_id: doc.id.clone(),
        summary_tokens: doc.tokens_of(&selected),
        summary_text,
        probs,
        selected,
    })
}

/// Top-k extraction; trigram blocking is opt-in.
pub fn extract_summary(
    doc: &Document,
    scorer: &impl SentenceScorer,
    top_k: usize,
    trigram_blocking: bool,
) -> Result<ExtractionResult> {
    extract_with(
        doc,
        scorer,
        &InferenceConfig {
            trigram_blocking,
            ..InferenceConfig::top_k(top_k)
        },
    )
}
