//! Section-aware extractive summarization for long documents.
//!
//! The crate covers the whole pipeline around a multi-task extractive
//! summarizer: corpus ingestion and filtering, greedy oracle labeling,
//! ROUGE scoring, a small from-scratch sentence encoder trained jointly on
//! sentence selection and section prediction, inference with optional
//! trigram blocking, and the per-document comparison tools used to study
//! how two systems differ.
//!
//! Runnable walkthroughs for each capability live under `examples/`.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod oracle;
pub mod plot;
pub mod rouge;
pub mod synth;
pub mod trainer;

pub use corpus::{Document, SectionCategory, SentenceRecord};
pub use error::{Error, Result};
pub use inference::{extract_summary, ExtractionResult, SentenceScorer};
pub use model::{ModelConfig, Summarizer};
pub use oracle::{greedy_oracle, GainMetric, OracleConfig};
pub use rouge::{rouge_l, rouge_n, rouge_suite, RougeScore};
