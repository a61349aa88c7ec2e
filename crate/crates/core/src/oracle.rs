//! Greedy ROUGE-maximizing oracle labels with optional section diversity.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetTag, Document, SectionCategory};
use crate::error::{Error, Result};
use crate::rouge::{rouge_l, rouge_n};

/// Largest document the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainMetric {
    /// Mean of ROUGE-1 F1 and ROUGE-2 F1.
    #[default]
    #[serde(rename = "rg12")]
    MeanRg1Rg2,
    /// Mean of ROUGE-1, ROUGE-2 and ROUGE-L F1.
    #[serde(rename = "rg12l")]
    MeanRg1Rg2RgL,
}

impl GainMetric {
    pub fn score<S: AsRef<str>, T: AsRef<str>>(self, candidate: &[S], reference: &[T]) -> f64 {
        let r1 = rouge_n(candidate, reference, 1).expect("n = 1").f1;
        let r2 = rouge_n(candidate, reference, 2).expect("n = 2").f1;
        match self {
            GainMetric::MeanRg1Rg2 => (r1 + r2) / 2.0,
            GainMetric::MeanRg1Rg2RgL => (r1 + r2 + rouge_l(candidate, reference).f1) / 3.0,
        }
    }
}

impl FromStr for GainMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rg12" => Ok(GainMetric::MeanRg1Rg2),
            "rg12l" => Ok(GainMetric::MeanRg1Rg2RgL),
            other => Err(Error::config(format!("unknown gain metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub k: usize,
    pub gain_metric: GainMetric,
    pub diversity: bool,
}

impl OracleConfig {
    pub fn new(k: usize, gain_metric: GainMetric, diversity: bool) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("oracle k must be >= 1"));
        }
        Ok(OracleConfig {
            k,
            gain_metric,
            diversity,
        })
    }

    pub fn for_dataset(tag: DatasetTag) -> Option<Self> {
        tag.oracle_k().map(|k| OracleConfig {
            k,
            gain_metric: GainMetric::default(),
            diversity: true,
        })
    }
}

/// One accepted greedy step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStep {
    pub position: usize,
    /// Gain metric of the selected set after this step.
    pub score: f64,
    /// True when the diversity restriction narrowed the candidate pool.
    pub restricted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleTrace {
    pub steps: Vec<OracleStep>,
}

impl OracleTrace {
    pub fn labels(&self, len: usize) -> Vec<bool> {
        let mut labels = vec![false; len];
        for step in &self.steps {
            labels[step.position] = true;
        }
        labels
    }

    pub fn final_score(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.score)
    }
}

pub fn greedy_oracle(doc: &Document, cfg: &OracleConfig) -> Result<Vec<bool>> {
    Ok(greedy_oracle_trace(doc, cfg)?.labels(doc.sentences.len()))
}

/// Greedy selection, returning every accepted step.
pub fn greedy_oracle_trace(doc: &Document, cfg: &OracleConfig) -> Result<OracleTrace> {
    if doc.sentences.is_empty() {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    let m = doc.sentences.len();
    let mut selected = vec![false; m];
    let mut per_section = [0usize; SectionCategory::COUNT];
    let mut current = 0.0;
    let mut trace = OracleTrace::default();

    while trace.steps.len() < cfg.k {
        // (position, score) for every candidate with strictly positive gain.
        let positive: Vec<(usize, f64)> = (0..m)
            .filter(|&i| !selected[i])
            .filter_map(|i| {
                let tokens = selection_tokens(doc, &selected, Some(i));
                let score = cfg.gain_metric.score(&tokens, &doc.summary_tokens);
                (score > current).then_some((i, score))
            })
            .collect();
        if positive.is_empty() {
            break;
        }

        let mut pool = positive.clone();
        let mut restricted = false;
        if cfg.diversity {
            let min_count = positive
                .iter()
                .map(|&(i, _)| per_section[doc.sentences[i].section_category.index()])
                .min()
                .expect("non-empty");
            let narrowed: Vec<(usize, f64)> = positive
                .iter()
                .copied()
                .filter(|&(i, _)| {
                    per_section[doc.sentences[i].section_category.index()] == min_count
                })
                .collect();
            if !narrowed.is_empty() {
                restricted = narrowed.len() < positive.len();
                pool = narrowed;
            }
        }

        // Highest score wins; `pool` is in position order so the first max is the lowest position.
        let (best, score) = pool
            .iter()
            .copied()
            .fold(None, |acc: Option<(usize, f64)>, (i, s)| match acc {
                Some((_, bs)) if bs >= s => acc,
                _ => Some((i, s)),
            })
            .expect("non-empty pool");

        selected[best] = true;
        per_section[doc.sentences[best].section_category.index()] += 1;
        current = score;
        trace.steps.push(OracleStep {
            position: best,
            score,
            restricted,
        });
    }
    Ok(trace)
}

fn selection_tokens<'a>(
    doc: &'a Document,
    selected: &[bool],
    extra: Option<usize>,
) -> Vec<&'a str> {
    doc.sentences
        .iter()
        .enumerate()
        .filter(|(i, _)| selected[*i] || extra == Some(*i))
        .flat_map(|(_, s)| s.tokens.iter().map(String::as_str))
        .collect()
}

/// Exhaustive search over all subsets of size at most `k`.
///
/// Returns the labels and the best score. Ties go to the lexicographically
/// smallest sorted position list.
pub fn brute_force_oracle(
    doc: &Document,
    k: usize,
    gain_metric: GainMetric,
) -> Result<(Vec<bool>, f64)> {
    let m = doc.sentences.len();
    if m == 0 {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            doc_id: doc.id.clone(),
            len: m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: (Vec<usize>, f64) = (Vec::new(), 0.0);
    for mask in 1u32..(1 << m) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let positions: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let tokens = doc.tokens_of(&positions);
        let score = gain_metric.score(&tokens, &doc.summary_tokens);
        if score > best.1 || (score == best.1 && positions < best.0) {
            best = (positions, score);
        }
    }
    let mut labels = vec![false; m];
    for p in best.0 {
        labels[p] = true;
    }
    Ok((labels, best.1))
}

/// Oracle settings keyed by dataset, with a fallback for untagged documents.
#[derive(Debug, Clone, PartialEq)]
pub struct PerDatasetConfig {
    pub default: OracleConfig,
    pub overrides: BTreeMap<DatasetTag, OracleConfig>,
}

impl PerDatasetConfig {
    pub fn uniform(cfg: OracleConfig) -> Self {
        PerDatasetConfig {
            default: cfg,
            overrides: BTreeMap::new(),
        }
    }

    /// Dataset budgets (30 / 15 / 25) with `default` for everything else.
    pub fn with_presets(default: OracleConfig) -> Self {
        let overrides = [
            DatasetTag::Longsumm,
            DatasetTag::ArxivLong,
            DatasetTag::PubmedLong,
        ]
        .into_iter()
        .filter_map(|tag| tag.oracle_k().map(|k| (tag, OracleConfig { k, ..default })))
        .collect();
        PerDatasetConfig { default, overrides }
    }

    pub fn resolve(&self, doc: &Document) -> &OracleConfig {
        doc.dataset
            .and_then(|tag| self.overrides.get(&tag))
            .unwrap_or(&self.default)
    }
}

pub fn label_document(doc: &mut Document, cfg: &PerDatasetConfig) -> Result<()> {
    let labels = greedy_oracle(doc, cfg.resolve(doc))?;
    doc.set_oracle_labels(&labels)
}

pub fn label_corpus(corpus: &mut [Document], cfg: &PerDatasetConfig) -> Result<()> {
    corpus
        .iter_mut()
        .try_for_each(|doc| label_document(doc, cfg))
}
