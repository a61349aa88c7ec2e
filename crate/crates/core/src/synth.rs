//! Seeded synthetic corpora with planted salient sentences and section markers.
//!
//! Each generated document has a known set of "planted" sentences carrying
//! keywords that also make up the reference summary, and every sentence
//! carries a marker word unique to its section. Both signals are recorded in
//! the output so supervised pipelines can be checked end to end.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    document_from_record, Document, DocumentRecord, SectionCategory, SectionKeywordMap,
    SentenceEntry,
};

pub type SynthRng = ChaCha8Rng;

const SECTION_TITLES: [&str; SectionCategory::COUNT] = [
    "Introduction",
    "Related Work",
    "Proposed Method",
    "Experimental Setup",
    "Results",
    "Conclusion",
    "Acknowledgements",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_docs: usize,
    pub sentences_per_doc: usize,
    /// Number of section categories in use (1..=7).
    pub sections: usize,
    pub planted_per_doc: usize,
    pub seed: u64,
    pub keyword_vocab: usize,
    pub filler_vocab: usize,
    pub markers_per_section: usize,
    /// Chance that a non-planted sentence carries one stray keyword.
    pub distractor_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_docs: 100,
            sentences_per_doc: 12,
            sections: SectionCategory::COUNT,
            planted_per_doc: 3,
            seed: 0,
            keyword_vocab: 60,
            filler_vocab: 300,
            markers_per_section: 3,
            distractor_rate: 0.15,
        }
    }
}

impl SynthConfig {
    pub fn new(num_docs: usize, sentences_per_doc: usize, sections: usize, seed: u64) -> Self {
        SynthConfig {
            num_docs,
            sentences_per_doc,
            sections,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> crate::Result<()> {
        if self.sentences_per_doc == 0 || self.planted_per_doc == 0 {
            return Err(crate::Error::config("synthetic sizes must be positive"));
        }
        if !(1..=SectionCategory::COUNT).contains(&self.sections) {
            return Err(crate::Error::config(format!(
                "synthetic section count must be in 1..={}",
                SectionCategory::COUNT
            )));
        }
        if self.keyword_vocab < 8 || self.filler_vocab < 8 || self.markers_per_section == 0 {
            return Err(crate::Error::config("synthetic vocabularies too small"));
        }
        Ok(())
    }
}

fn marker(cat: usize, j: usize) -> String {
    format!("sec{cat}mark{j}")
}

/// Generates `cfg.num_docs` records. Identical configs give identical output.
pub fn gen_synthetic(cfg: &SynthConfig) -> crate::Result<Vec<DocumentRecord>> {
    cfg.validate()?;
    let mut rng = SynthRng::seed_from_u64(cfg.seed);
    Ok((0..cfg.num_docs)
        .map(|i| gen_document(cfg, &mut rng, &format!("syn{:05}", i)))
        .collect())
}

/// Same as [`gen_synthetic`] but parsed into documents.
pub fn gen_synthetic_docs(cfg: &SynthConfig) -> crate::Result<Vec<Document>> {
    let keywords = SectionKeywordMap::default();
    gen_synthetic(cfg)?
        .into_iter()
        .map(|r| document_from_record(r, &keywords))
        .collect()
}

fn gen_document(cfg: &SynthConfig, rng: &mut SynthRng, id: &str) -> DocumentRecord {
    let m = cfg.sentences_per_doc;
    let mut cats: Vec<usize> = (0..m).map(|_| rng.random_range(0..cfg.sections)).collect();
    cats.sort_unstable();

    let planted_n = cfg.planted_per_doc.min(m);
    let mut positions: Vec<usize> = (0..m).collect();
    positions.shuffle(rng);
    let mut planted: Vec<usize> = positions[..planted_n].to_vec();
    planted.sort_unstable();

    let keyword = |rng: &mut SynthRng| format!("key{}", rng.random_range(0..cfg.keyword_vocab));
    let filler = |rng: &mut SynthRng| format!("w{}", rng.random_range(0..cfg.filler_vocab));

    let mut summary_words = Vec::new();
    let sentences = (0..m)
        .map(|i| {
            let cat = cats[i];
            let mut words = vec![marker(cat, rng.random_range(0..cfg.markers_per_section))];
            if planted.binary_search(&i).is_ok() {
                let mut keys: Vec<String> = Vec::new();
                while keys.len() < 4 {
                    let k = keyword(rng);
                    if !keys.contains(&k) {
                        keys.push(k);
                    }
                }
                summary_words.extend(keys.iter().cloned());
                summary_words.push(format!("sum{}", rng.random_range(0..cfg.keyword_vocab)));
                words.extend(keys);
                words.extend((0..3).map(|_| filler(rng)));
            } else {
                words.extend((0..6).map(|_| filler(rng)));
                if rng.random_bool(cfg.distractor_rate) {
                    let slot = rng.random_range(1..words.len());
                    words[slot] = keyword(rng);
                }
            }
            words[1..].shuffle(rng);
            let category = SectionCategory::from_index(cat).expect("cat < 7");
            SentenceEntry {
                text: format!("{} .", words.join(" ")),
                section: SECTION_TITLES[cat].to_string(),
                section_category: Some(category),
            }
        })
        .collect();

    DocumentRecord {
        id: id.to_string(),
        sentences,
        summary: format!("{} .", summary_words.join(" ")),
        oracle_labels: None,
        dataset: None,
        planted_positives: Some(planted),
    }
}

/// A tiny random document over an eight-word vocabulary, for oracle tests.
pub fn random_small_doc(rng: &mut SynthRng, id: &str, max_sentences: usize) -> Document {
    const VOCAB: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];
    const TITLES: [&str; 4] = ["Introduction", "Method", "Results", "Appendix"];
    let m = rng.random_range(1..=max_sentences);
    let words = |rng: &mut SynthRng, lo: usize, hi: usize| {
        let n = rng.random_range(lo..=hi);
        (0..n)
            .map(|_| *VOCAB.choose(rng).expect("non-empty"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let record = DocumentRecord {
        id: id.to_string(),
        sentences: (0..m)
            .map(|_| SentenceEntry {
                text: words(rng, 1, 5),
                section: TITLES.choose(rng).expect("non-empty").to_string(),
                section_category: None,
            })
            .collect(),
        summary: words(rng, 3, 12),
        oracle_labels: None,
        dataset: None,
        planted_positives: None,
    };
    document_from_record(record, &SectionKeywordMap::default()).expect("non-empty document")
}
