//! ROUGE-N and ROUGE-L over flat token sequences.
//!
//! Counting is multiset based (overlap clipped per n-gram), no stemming and
//! no stopword removal. F1 is the unweighted harmonic mean.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }

    fn from_counts(hits: usize, candidate_total: usize, reference_total: usize) -> Self {
        if candidate_total == 0 || reference_total == 0 {
            return RougeScore::default();
        }
        RougeScore::from_pr(
            hits as f64 / candidate_total as f64,
            hits as f64 / reference_total as f64,
        )
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

pub fn rouge_n<S: AsRef<str>, T: AsRef<str>>(
    candidate: &[S],
    reference: &[T],
    n: usize,
) -> Result<RougeScore> {
    if n == 0 {
        return Err(Error::InvalidN(n));
    }
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let hits: usize = cand
        .iter()
        .map(|(gram, &c)| refs.get(gram).map_or(0, |&r| c.min(r)))
        .sum();
    let total = |len: usize| len.saturating_sub(n - 1);
    Ok(RougeScore::from_counts(
        hits,
        total(candidate.len()),
        total(reference.len()),
    ))
}

/// Length of the longest common subsequence, O(|a|·|b|) time, O(|b|) memory.
pub fn lcs_len<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> RougeScore {
    RougeScore::from_counts(
        lcs_len(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RougeSuite {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    pub rouge_l: RougeScore,
}

impl RougeSuite {
    pub fn f1s(&self) -> [f64; 3] {
        [self.rouge1.f1, self.rouge2.f1, self.rouge_l.f1]
    }
}

pub fn rouge_suite<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> RougeSuite {
    RougeSuite {
        rouge1: rouge_n(candidate, reference, 1).expect("n = 1 is valid"),
        rouge2: rouge_n(candidate, reference, 2).expect("n = 2 is valid"),
        rouge_l: rouge_l(candidate, reference),
    }
}
