//! Document records, tokenization, section canonicalization and corpus filtering.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercases `text`, splits on whitespace and detaches leading and trailing
/// punctuation into one token per character. Internal punctuation is kept.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        while start < chars.len() && is_punct(chars[start]) {
            start += 1;
        }
        let mut end = chars.len();
        while end > start && is_punct(chars[end - 1]) {
            end -= 1;
        }
        for &c in &chars[..start] {
            tokens.push(c.to_lowercase().collect());
        }
        if start < end {
            let core: String = chars[start..end].iter().collect();
            tokens.push(core.to_lowercase());
        }
        for &c in &chars[end..] {
            tokens.push(c.to_lowercase().collect());
        }
    }
    tokens
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                ..='\u{201F}' | '\u{2013}' | '\u{2014}' | '\u{2026}' | '\u{00AB}' | '\u{00BB}'
        )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SectionCategory {
    Introduction,
    Background,
    Method,
    Experiment,
    Result,
    Conclusion,
    Other,
}

impl SectionCategory {
    pub const COUNT: usize = 7;

    /// Keyword matching order; the first category with a hit wins.
    pub const ALL: [SectionCategory; 7] = [
        SectionCategory::Introduction,
        SectionCategory::Background,
        SectionCategory::Method,
        SectionCategory::Experiment,
        SectionCategory::Result,
        SectionCategory::Conclusion,
        SectionCategory::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SectionCategory::Introduction => "INTRODUCTION",
            SectionCategory::Background => "BACKGROUND",
            SectionCategory::Method => "METHOD",
            SectionCategory::Experiment => "EXPERIMENT",
            SectionCategory::Result => "RESULT",
            SectionCategory::Conclusion => "CONCLUSION",
            SectionCategory::Other => "OTHER",
        }
    }
}

impl fmt::Display for SectionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SectionCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown section category {s:?}")))
    }
}

/// Case-insensitive substring keywords per section category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionKeywordMap {
    keywords: BTreeMap<SectionCategory, Vec<String>>,
}

impl Default for SectionKeywordMap {
    fn default() -> Self {
        let table: [(SectionCategory, &[&str]); 6] = [
            (
                SectionCategory::Introduction,
                &["introduction", "overview", "motivation"],
            ),
            (
                SectionCategory::Background,
                &[
                    "background",
                    "related work",
                    "prior work",
                    "previous work",
                    "preliminar",
                    "literature",
                ],
            ),
            (
                SectionCategory::Method,
                &[
                    "method",
                    "approach",
                    "model",
                    "proposed",
                    "framework",
                    "architecture",
                    "algorithm",
                ],
            ),
            (
                SectionCategory::Experiment,
                &[
                    "experiment",
                    "evaluation",
                    "setup",
                    "dataset",
                    "implementation",
                ],
            ),
            (
                SectionCategory::Result,
                &["result", "discussion", "analysis", "finding"],
            ),
            (
                SectionCategory::Conclusion,
                &["conclusion", "concluding", "future work", "summary"],
            ),
        ];
        let keywords = table
            .into_iter()
            .map(|(cat, kws)| (cat, kws.iter().map(|s| s.to_string()).collect()))
            .collect();
        SectionKeywordMap { keywords }
    }
}

impl SectionKeywordMap {
    pub fn new(keywords: BTreeMap<SectionCategory, Vec<String>>) -> Self {
        let keywords = keywords
            .into_iter()
            .map(|(cat, kws)| (cat, kws.into_iter().map(|k| k.to_lowercase()).collect()))
            .collect();
        SectionKeywordMap { keywords }
    }

    /// Loads a JSON object of `CATEGORY -> [keyword, ...]`. Categories absent
    /// from the file have no keywords.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        let mut keywords = BTreeMap::new();
        for (name, kws) in raw {
            keywords.insert(name.parse::<SectionCategory>()?, kws);
        }
        Ok(Self::new(keywords))
    }

    pub fn canonicalize(&self, raw_title: &str) -> SectionCategory {
        let title = raw_title.to_lowercase();
        SectionCategory::ALL
            .iter()
            .copied()
            .find(|cat| {
                self.keywords
                    .get(cat)
                    .is_some_and(|kws| kws.iter().any(|k| !k.is_empty() && title.contains(k)))
            })
            .unwrap_or(SectionCategory::Other)
    }
}

/// Maps a raw section heading onto the default category set.
pub fn canonicalize_section(raw_title: &str) -> SectionCategory {
    SectionKeywordMap::default().canonicalize(raw_title)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetTag {
    Longsumm,
    ArxivLong,
    PubmedLong,
    Custom,
}

impl DatasetTag {
    /// Oracle budget used for labeling (and the matching inference top-k).
    pub fn oracle_k(self) -> Option<usize> {
        match self {
            DatasetTag::Longsumm => Some(30),
            DatasetTag::ArxivLong => Some(15),
            DatasetTag::PubmedLong => Some(25),
            DatasetTag::Custom => None,
        }
    }

    /// Minimum reference-summary length admitted by the dataset filter.
    pub fn min_summary_tokens(self) -> Option<usize> {
        match self {
            DatasetTag::ArxivLong | DatasetTag::PubmedLong => Some(350),
            DatasetTag::Longsumm | DatasetTag::Custom => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetTag::Longsumm => "longsumm",
            DatasetTag::ArxivLong => "arxiv-long",
            DatasetTag::PubmedLong => "pubmed-long",
            DatasetTag::Custom => "custom",
        }
    }
}

impl FromStr for DatasetTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "longsumm" => Ok(DatasetTag::Longsumm),
            "arxiv-long" => Ok(DatasetTag::ArxivLong),
            "pubmed-long" => Ok(DatasetTag::PubmedLong),
            "custom" => Ok(DatasetTag::Custom),
            other => Err(Error::config(format!("unknown dataset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRecord {
    pub text: String,
    pub tokens: Vec<String>,
    pub raw_section: String,
    pub section_category: SectionCategory,
    pub position: usize,
    pub oracle_label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<SentenceRecord>,
    pub summary_text: String,
    pub summary_tokens: Vec<String>,
    pub dataset: Option<DatasetTag>,
    /// Known positives for generated corpora; absent for real data.
    pub planted_positives: Option<Vec<usize>>,
}

impl Document {
    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn oracle_labels(&self) -> Option<Vec<bool>> {
        self.sentences.iter().map(|s| s.oracle_label).collect()
    }

    pub fn set_oracle_labels(&mut self, labels: &[bool]) -> Result<()> {
        if labels.len() != self.sentences.len() {
            return Err(Error::LengthMismatch {
                what: "oracle labels vs sentences",
                left: labels.len(),
                right: self.sentences.len(),
            });
        }
        for (s, &l) in self.sentences.iter_mut().zip(labels) {
            s.oracle_label = Some(l);
        }
        Ok(())
    }

    pub fn section_indices(&self) -> Vec<usize> {
        self.sentences
            .iter()
            .map(|s| s.section_category.index())
            .collect()
    }

    /// Concatenated tokens of the sentences at `positions`, in the order given.
    pub fn tokens_of(&self, positions: &[usize]) -> Vec<String> {
        positions
            .iter()
            .flat_map(|&p| self.sentences[p].tokens.iter().cloned())
            .collect()
    }

    pub fn to_record(&self) -> DocumentRecord {
        DocumentRecord {
            id: self.id.clone(),
            sentences: self
                .sentences
                .iter()
                .map(|s| SentenceEntry {
                    text: s.text.clone(),
                    section: s.raw_section.clone(),
                    section_category: Some(s.section_category),
                })
                .collect(),
            summary: self.summary_text.clone(),
            oracle_labels: self
                .oracle_labels()
                .map(|ls| ls.into_iter().map(u8::from).collect()),
            dataset: self.dataset,
            planted_positives: self.planted_positives.clone(),
        }
    }
}

/// Wire format of one JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub id: String,
    pub sentences: Vec<SentenceEntry>,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_labels: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_positives: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceEntry {
    pub text: String,
    pub section: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section_category: Option<SectionCategory>,
}

/// Builds a [`Document`] from a JSON value. A `section_category` already
/// present on a sentence is kept; otherwise the heading is canonicalized.
pub fn parse_document(raw: serde_json::Value, keywords: &SectionKeywordMap) -> Result<Document> {
    let doc_id = raw.get("id").and_then(|v| v.as_str()).map(str::to_string);
    let record: DocumentRecord =
        serde_json::from_value(raw).map_err(|e| Error::MalformedRecord {
            doc_id: doc_id.clone(),
            reason: e.to_string(),
        })?;
    document_from_record(record, keywords)
}

pub fn parse_line(line: &str, keywords: &SectionKeywordMap) -> Result<Document> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            doc_id: None,
            reason: e.to_string(),
        })?;
    parse_document(value, keywords)
}

pub fn document_from_record(
    record: DocumentRecord,
    keywords: &SectionKeywordMap,
) -> Result<Document> {
    if record.sentences.is_empty() {
        return Err(Error::EmptyDocument(record.id));
    }
    let malformed = |reason: String| Error::MalformedRecord {
        doc_id: Some(record.id.clone()),
        reason,
    };
    let labels = match &record.oracle_labels {
        None => None,
        Some(ls) if ls.len() != record.sentences.len() => {
            return Err(malformed(format!(
                "{} oracle labels for {} sentences",
                ls.len(),
                record.sentences.len()
            )))
        }
        Some(ls) => Some(
            ls.iter()
                .map(|&l| match l {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(malformed(format!("oracle label {other} is not 0/1"))),
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    if let Some(planted) = &record.planted_positives {
        if let Some(&bad) = planted.iter().find(|&&p| p >= record.sentences.len()) {
            return Err(malformed(format!("planted position {bad} out of range")));
        }
    }
    let sentences = record
        .sentences
        .into_iter()
        .enumerate()
        .map(|(position, entry)| SentenceRecord {
            tokens: tokenize(&entry.text),
            section_category: entry
                .section_category
                .unwrap_or_else(|| keywords.canonicalize(&entry.section)),
            raw_section: entry.section,
            text: entry.text,
            position,
            oracle_label: labels.as_ref().map(|ls| ls[position]),
        })
        .collect();
    Ok(Document {
        summary_tokens: tokenize(&record.summary),
        summary_text: record.summary,
        id: record.id,
        sentences,
        dataset: record.dataset,
        planted_positives: record.planted_positives,
    })
}

/// Keeps documents whose reference summary has at least `min_summary_tokens` tokens.
pub fn filter_long(corpus: &[Document], min_summary_tokens: usize) -> Vec<Document> {
    corpus
        .iter()
        .filter(|d| is_long(d, min_summary_tokens))
        .cloned()
        .collect()
}

pub fn is_long(doc: &Document, min_summary_tokens: usize) -> bool {
    doc.summary_tokens.len() >= min_summary_tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CorpusStats {
    pub num_docs: usize,
    pub avg_doc_tokens: f64,
    pub avg_summary_tokens: f64,
}

/// Streaming accumulator so statistics can be computed line by line.
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    docs: usize,
    doc_tokens: u64,
    summary_tokens: u64,
}

impl StatsAccumulator {
    pub fn add(&mut self, doc: &Document) {
        self.docs += 1;
        self.doc_tokens += doc.num_tokens() as u64;
        self.summary_tokens += doc.summary_tokens.len() as u64;
    }

    pub fn finish(&self) -> CorpusStats {
        if self.docs == 0 {
            return CorpusStats::default();
        }
        let n = self.docs as f64;
        CorpusStats {
            num_docs: self.docs,
            avg_doc_tokens: self.doc_tokens as f64 / n,
            avg_summary_tokens: self.summary_tokens as f64 / n,
        }
    }
}

pub fn compute_stats(corpus: &[Document]) -> CorpusStats {
    let mut acc = StatsAccumulator::default();
    corpus.iter().for_each(|d| acc.add(d));
    acc.finish()
}
