use std::collections::HashMap;

use crate::corpus::Document;

pub const UNK: &str = "<unk>";

/// Token to id mapping; id 0 is the unknown token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let mut all = vec![UNK.to_string()];
        all.extend(tokens.into_iter().filter(|t| t != UNK));
        let index = all
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab { tokens: all, index }
    }

    /// Most frequent tokens first (ties alphabetical), capped at `max_size` entries
    /// including the unknown token.
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a Document>, max_size: usize) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for doc in docs {
            for s in &doc.sentences {
                for t in &s.tokens {
                    *counts.entry(t.as_str()).or_insert(0) += 1;
                }
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let keep = max_size.saturating_sub(1);
        Self::from_tokens(
            ranked
                .into_iter()
                .take(keep)
                .map(|(t, _)| t.to_string())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}
