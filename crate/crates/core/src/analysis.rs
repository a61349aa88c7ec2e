//! Per-document system comparisons and the tables built from them.

use std::path::Path;

use serde::Serialize;

use crate::corpus::{Document, SectionCategory};
use crate::error::{Error, Result};
use crate::inference::{extract_summary, ExtractionResult};
use crate::model::Summarizer;
use crate::rouge::rouge_suite;
use crate::trainer::csv_err;

/// Default extraction-probability cutoff for heatmap export.
pub const HEATMAP_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RougeF1 {
    pub rg1: f64,
    pub rg2: f64,
    pub rgl: f64,
}

impl RougeF1 {
    pub fn of<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Self {
        let [rg1, rg2, rgl] = rouge_suite(candidate, reference).f1s();
        RougeF1 { rg1, rg2, rgl }
    }

    pub fn mean(&self) -> f64 {
        (self.rg1 + self.rg2 + self.rgl) / 3.0
    }

    fn as_array(&self) -> [f64; 3] {
        [self.rg1, self.rg2, self.rgl]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BinLabel {
    Improved,
    Tied,
    Declined,
}

impl BinLabel {
    pub const ALL: [BinLabel; 3] = [BinLabel::Improved, BinLabel::Tied, BinLabel::Declined];

    pub fn of(rg_diff: f64) -> Self {
        if rg_diff > 0.0 {
            BinLabel::Improved
        } else if rg_diff < 0.0 {
            BinLabel::Declined
        } else {
            BinLabel::Tied
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinLabel::Improved => "IMPROVED",
            BinLabel::Tied => "TIED",
            BinLabel::Declined => "DECLINED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocComparison {
    pub doc_id: String,
    pub rouge_base: RougeF1,
    pub rouge_model: RougeF1,
    pub f1_base: f64,
    pub f1_model: f64,
    pub rg_diff: f64,
    pub f_diff: f64,
    pub summary_len_tokens: usize,
}

impl DocComparison {
    pub fn new(
        doc_id: String,
        rouge_base: RougeF1,
        rouge_model: RougeF1,
        f1_base: f64,
        f1_model: f64,
        summary_len_tokens: usize,
    ) -> Self {
        let rg_diff = rouge_model
            .as_array()
            .iter()
            .zip(rouge_base.as_array())
            .map(|(m, b)| m - b)
            .sum::<f64>()
            / 3.0;
        DocComparison {
            doc_id,
            rouge_base,
            rouge_model,
            f1_base,
            f1_model,
            rg_diff,
            f_diff: f1_model - f1_base,
            summary_len_tokens,
        }
    }

    pub fn bin(&self) -> BinLabel {
        BinLabel::of(self.rg_diff)
    }

    /// The same comparison with the two systems exchanged.
    pub fn swapped(&self) -> Self {
        DocComparison::new(
            self.doc_id.clone(),
            self.rouge_model,
            self.rouge_base,
            self.f1_model,
            self.f1_base,
            self.summary_len_tokens,
        )
    }
}

/// Precision/recall F1 of a selected position set against oracle positives.
pub fn selection_f1(selected: &[usize], oracle_labels: &[bool]) -> f64 {
    let positives = oracle_labels.iter().filter(|&&l| l).count();
    if selected.is_empty() || positives == 0 {
        return 0.0;
    }
    let hits = selected
        .iter()
        .filter(|&&p| oracle_labels.get(p).copied().unwrap_or(false))
        .count();
    if hits == 0 {
        return 0.0;
    }
    let precision = hits as f64 / selected.len() as f64;
    let recall = hits as f64 / positives as f64;
    2.0 * precision * recall / (precision + recall)
}

pub fn compare(
    doc: &Document,
    result_base: &ExtractionResult,
    result_model: &ExtractionResult,
    oracle_labels: &[bool],
) -> Result<DocComparison> {
    for r in [result_base, result_model] {
        if r.doc_id != doc.id {
            return Err(Error::DocMismatch(r.doc_id.clone(), doc.id.clone()));
        }
    }
    if oracle_labels.len() != doc.sentences.len() {
        return Err(Error::LengthMismatch {
            what: "oracle labels vs sentences",
            left: oracle_labels.len(),
            right: doc.sentences.len(),
        });
    }
    Ok(DocComparison::new(
        doc.id.clone(),
        RougeF1::of(&result_base.summary_tokens, &doc.summary_tokens),
        RougeF1::of(&result_model.summary_tokens, &doc.summary_tokens),
        selection_f1(&result_base.selected, oracle_labels),
        selection_f1(&result_model.selected, oracle_labels),
        doc.summary_tokens.len(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinRow {
    pub bin: &'static str,
    pub count: usize,
    pub mean_rg_diff: f64,
    pub mean_f_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinSummary {
    /// Improved, tied, declined, in that order.
    pub bins: [BinRow; 3],
    pub total: BinRow,
}

impl BinSummary {
    pub fn get(&self, label: BinLabel) -> &BinRow {
        &self.bins[label as usize]
    }

    pub fn rows(&self) -> impl Iterator<Item = &BinRow> {
        self.bins.iter().chain(std::iter::once(&self.total))
    }
}

fn bin_row(name: &'static str, items: &[&DocComparison]) -> BinRow {
    let n = items.len();
    let mean = |f: fn(&DocComparison) -> f64| {
        if n == 0 {
            0.0
        } else {
            items.iter().map(|c| f(c)).sum::<f64>() / n as f64
        }
    };
    BinRow {
        bin: name,
        count: n,
        mean_rg_diff: mean(|c| c.rg_diff),
        mean_f_diff: mean(|c| c.f_diff),
    }
}

pub fn bin_summary(comparisons: &[DocComparison]) -> BinSummary {
    let bins = BinLabel::ALL.map(|label| {
        let members: Vec<&DocComparison> =
            comparisons.iter().filter(|c| c.bin() == label).collect();
        bin_row(label.as_str(), &members)
    });
    let all: Vec<&DocComparison> = comparisons.iter().collect();
    BinSummary {
        bins,
        total: bin_row("TOTAL", &all),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthBin {
    pub index: usize,
    pub size: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub base: RougeF1,
    pub model: RougeF1,
}

/// Sizes of `num_bins` contiguous equal-count bins over `n` items; the
/// first `n mod num_bins` bins take one extra item.
pub fn equal_count_sizes(n: usize, num_bins: usize) -> Vec<usize> {
    let (q, r) = (n / num_bins, n % num_bins);
    (0..num_bins).map(|i| q + usize::from(i < r)).collect()
}

/// Equal-count bins over reference-summary length, with mean ROUGE F1 per system.
pub fn length_bins(comparisons: &[DocComparison], num_bins: usize) -> Result<Vec<LengthBin>> {
    if num_bins == 0 || num_bins > comparisons.len() {
        return Err(Error::TooFewDocs {
            docs: comparisons.len(),
            bins: num_bins,
        });
    }
    let mut sorted: Vec<&DocComparison> = comparisons.iter().collect();
    sorted.sort_by_key(|c| c.summary_len_tokens);

    let mean = |items: &[&DocComparison], f: fn(&DocComparison) -> RougeF1| {
        let n = items.len() as f64;
        let sum = items.iter().fold([0.0; 3], |mut acc, c| {
            for (a, v) in acc.iter_mut().zip(f(c).as_array()) {
                *a += v;
            }
            acc
        });
        RougeF1 {
            rg1: sum[0] / n,
            rg2: sum[1] / n,
            rgl: sum[2] / n,
        }
    };

    let mut start = 0;
    Ok(equal_count_sizes(sorted.len(), num_bins)
        .into_iter()
        .enumerate()
        .map(|(index, size)| {
            let items = &sorted[start..start + size];
            start += size;
            LengthBin {
                index,
                size,
                min_len: items[0].summary_len_tokens,
                max_len: items[size - 1].summary_len_tokens,
                base: mean(items, |c| c.rouge_base),
                model: mean(items, |c| c.rouge_model),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub position: usize,
    pub section_category: SectionCategory,
    pub prob: f64,
    pub is_selected: bool,
    pub is_oracle: bool,
}

/// Sentences whose extraction probability exceeds `threshold`, in document order.
pub fn heatmap_export(
    doc: &Document,
    probs: &[f64],
    selected: &[usize],
    oracle_labels: &[bool],
    threshold: f64,
) -> Result<Vec<HeatmapRow>> {
    let m = doc.sentences.len();
    for (what, len) in [
        ("probabilities vs sentences", probs.len()),
        ("oracle labels vs sentences", oracle_labels.len()),
    ] {
        if len != m {
            return Err(Error::LengthMismatch {
                what,
                left: len,
                right: m,
            });
        }
    }
    Ok(doc
        .sentences
        .iter()
        .enumerate()
        .filter(|&(i, _)| probs[i] > threshold)
        .map(|(i, s)| HeatmapRow {
            position: i,
            section_category: s.section_category,
            prob: probs[i],
            is_selected: selected.contains(&i),
            is_oracle: oracle_labels[i],
        })
        .collect())
}

/// Selection and section-prediction quality on held-out documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeldOutMetrics {
    /// Mean per-document selection F1 of top-k extracts.
    pub selection_f1: f64,
    /// Fraction of sentences whose argmax section is correct.
    pub section_accuracy: f64,
    /// Mean probability assigned to the true section.
    pub mean_true_section_prob: f64,
}

/// Scores `docs` against planted positives when present, oracle labels otherwise.
pub fn held_out_metrics(
    model: &Summarizer,
    docs: &[Document],
    top_k: usize,
) -> Result<HeldOutMetrics> {
    if docs.is_empty() {
        return Err(Error::EmptyValidationSet);
    }
    let (mut f1_sum, mut correct, mut prob_sum, mut sentences) = (0.0, 0usize, 0.0, 0usize);
    for doc in docs {
        let labels = match &doc.planted_positives {
            Some(planted) => {
                let mut l = vec![false; doc.sentences.len()];
                planted.iter().for_each(|&p| l[p] = true);
                l
            }
            None => doc
                .oracle_labels()
                .ok_or_else(|| Error::MissingLabels(doc.id.clone()))?,
        };
        let result = extract_summary(doc, model, top_k, false)?;
        f1_sum += selection_f1(&result.selected, &labels);

        let preds = model.predict(doc)?;
        for (row, s) in preds.section_dists.rows().into_iter().zip(&doc.sentences) {
            let truth = s.section_category.index();
            let argmax = row
                .iter()
                .enumerate()
                .fold(0, |b, (i, &p)| if p > row[b] { i } else { b });
            correct += usize::from(argmax == truth);
            prob_sum += row[truth];
            sentences += 1;
        }
    }
    Ok(HeldOutMetrics {
        selection_f1: f1_sum / docs.len() as f64,
        section_accuracy: correct as f64 / sentences as f64,
        mean_true_section_prob: prob_sum / sentences as f64,
    })
}

#[derive(Serialize)]
struct ComparisonCsvRow<'a> {
    doc_id: &'a str,
    base_rg1: f64,
    base_rg2: f64,
    base_rgl: f64,
    model_rg1: f64,
    model_rg2: f64,
    model_rgl: f64,
    f1_base: f64,
    f1_model: f64,
    rg_diff: f64,
    f_diff: f64,
    summary_len_tokens: usize,
    bin: &'static str,
}

pub fn write_comparisons_csv(path: &Path, comparisons: &[DocComparison]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for c in comparisons {
        w.serialize(ComparisonCsvRow {
            doc_id: &c.doc_id,
            base_rg1: c.rouge_base.rg1,
            base_rg2: c.rouge_base.rg2,
            base_rgl: c.rouge_base.rgl,
            model_rg1: c.rouge_model.rg1,
            model_rg2: c.rouge_model.rg2,
            model_rgl: c.rouge_model.rgl,
            f1_base: c.f1_base,
            f1_model: c.f1_model,
            rg_diff: c.rg_diff,
            f_diff: c.f_diff,
            summary_len_tokens: c.summary_len_tokens,
            bin: c.bin().as_str(),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_bins_csv(path: &Path, summary: &BinSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in summary.rows() {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct LengthBinCsvRow {
    bin: usize,
    size: usize,
    min_len: usize,
    max_len: usize,
    base_rg1: f64,
    base_rg2: f64,
    base_rgl: f64,
    model_rg1: f64,
    model_rg2: f64,
    model_rgl: f64,
}

pub fn write_length_bins_csv(path: &Path, bins: &[LengthBin]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for b in bins {
        w.serialize(LengthBinCsvRow {
            bin: b.index,
            size: b.size,
            min_len: b.min_len,
            max_len: b.max_len,
            base_rg1: b.base.rg1,
            base_rg2: b.base.rg2,
            base_rgl: b.base.rgl,
            model_rg1: b.model.rg1,
            model_rg2: b.model.rg2,
            model_rgl: b.model.rgl,
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_heatmap_csv(path: &Path, rows: &[HeatmapRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// File-name-safe form of a document id.
pub fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::doc;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn f1s(rg1: f64, rg2: f64, rgl: f64) -> RougeF1 {
        RougeF1 { rg1, rg2, rgl }
    }

    fn cmp_with(rg_diff_model: RougeF1, len: usize) -> DocComparison {
        DocComparison::new("d".into(), f1s(0.3, 0.1, 0.2), rg_diff_model, 0.5, 0.5, len)
    }

    fn result(doc: &Document, selected: Vec<usize>) -> ExtractionResult {
        ExtractionResult {
            doc_id: doc.id.clone(),
            probs: vec![0.5; doc.sentences.len()],
            summary_tokens: doc.tokens_of(&selected),
            summary_text: String::new(),
            selected,
        }
    }

    #[test]
    fn compare_examples() {
        let d = doc(
            "d",
            &[("a b c", "I"), ("d e f", "M"), ("x y", "R")],
            "a b c d e f",
        );
        let same = compare(
            &d,
            &result(&d, vec![0]),
            &result(&d, vec![0]),
            &[true, true, false],
        )
        .unwrap();
        assert_eq!(same.rg_diff, 0.0);
        assert_eq!(same.bin(), BinLabel::Tied);

        let perfect = compare(
            &d,
            &result(&d, vec![2]),
            &result(&d, vec![0, 1]),
            &[true, true, false],
        )
        .unwrap();
        assert_eq!(perfect.f1_model, 1.0);
        assert_eq!(perfect.f1_base, 0.0);
        assert_eq!(perfect.f_diff, 1.0);
        assert_eq!(perfect.bin(), BinLabel::Improved);

        let mut other = result(&d, vec![0]);
        other.doc_id = "zzz".into();
        assert!(matches!(
            compare(&d, &other, &result(&d, vec![0]), &[true, true, false]),
            Err(Error::DocMismatch(..))
        ));
    }

    #[test]
    fn rg_diff_hand_value() {
        let c = DocComparison::new(
            "d".into(),
            f1s(0.40, 0.10, 0.16),
            f1s(0.42, 0.13, 0.17),
            0.0,
            0.0,
            10,
        );
        assert_abs_diff_eq!(c.rg_diff, 0.02, epsilon = 1e-12);
    }

    #[test]
    fn selection_f1_examples() {
        let oracle = [true, true, false, true, true, false];
        assert_eq!(selection_f1(&[0, 1, 3, 4], &oracle), 1.0);
        assert_eq!(selection_f1(&[2, 5], &oracle), 0.0);
        assert_abs_diff_eq!(
            selection_f1(&[0, 1, 2], &oracle),
            4.0 / 7.0,
            epsilon = 1e-12
        );
        assert_eq!(selection_f1(&[], &oracle), 0.0);
        assert_eq!(selection_f1(&[0], &[false]), 0.0);
    }

    #[test]
    fn bins_all_tied() {
        let cs: Vec<_> = (0..4).map(|i| cmp_with(f1s(0.3, 0.1, 0.2), i)).collect();
        let s = bin_summary(&cs);
        assert_eq!(s.get(BinLabel::Tied).count, 4);
        assert_eq!(s.get(BinLabel::Tied).mean_rg_diff, 0.0);
        assert_eq!(s.total.count, 4);
        let empty = bin_summary(&[]);
        assert!(empty.rows().all(|r| r.count == 0 && r.mean_rg_diff == 0.0));
    }

    #[test]
    fn bin_is_exact_sign() {
        assert_eq!(BinLabel::of(0.0), BinLabel::Tied);
        assert_eq!(BinLabel::of(-0.0), BinLabel::Tied);
        assert_eq!(BinLabel::of(1e-12), BinLabel::Improved);
        assert_eq!(BinLabel::of(-1e-12), BinLabel::Declined);
    }

    #[test]
    fn length_bin_sizes() {
        assert_eq!(equal_count_sizes(155, 5), [31; 5]);
        assert_eq!(equal_count_sizes(7, 3), [3, 2, 2]);
        assert_eq!(equal_count_sizes(1960, 10), [196; 10]);

        let cs: Vec<_> = (0..7)
            .rev()
            .map(|i| cmp_with(f1s(0.1 * i as f64, 0.0, 0.0), i))
            .collect();
        let bins = length_bins(&cs, 3).unwrap();
        assert_eq!(bins.iter().map(|b| b.size).collect::<Vec<_>>(), [3, 2, 2]);
        assert_eq!((bins[0].min_len, bins[0].max_len), (0, 2));
        assert_abs_diff_eq!(bins[0].model.rg1, 0.1, epsilon = 1e-12);

        let one = length_bins(&cs, 1).unwrap();
        let mean = cs.iter().map(|c| c.rouge_model.rg1).sum::<f64>() / 7.0;
        assert_abs_diff_eq!(one[0].model.rg1, mean, epsilon = 1e-12);
        assert!(matches!(length_bins(&cs, 8), Err(Error::TooFewDocs { .. })));
        assert!(length_bins(&cs, 0).is_err());
    }

    #[test]
    fn heatmap_examples() {
        let d = doc(
            "d",
            &[("a", "Introduction"), ("b", "Method"), ("c", "Results")],
            "x",
        );
        let rows =
            heatmap_export(&d, &[0.9, 0.10, 0.2], &[0], &[true, false, false], 0.15).unwrap();
        assert_eq!(rows.iter().map(|r| r.position).collect::<Vec<_>>(), [0, 2]);
        assert!(rows[0].is_selected && rows[0].is_oracle);
        assert_eq!(rows[1].section_category, SectionCategory::Result);
        assert!(
            heatmap_export(&d, &[0.1, 0.15, 0.0], &[], &[false; 3], 0.15)
                .unwrap()
                .is_empty()
        );
        assert!(heatmap_export(&d, &[0.1], &[], &[false; 3], 0.15).is_err());
    }

    proptest! {
        #[test]
        fn bin_partition_and_antisymmetry(
            vals in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 0..50)
        ) {
            let cs: Vec<DocComparison> = vals
                .iter()
                .enumerate()
                .map(|(i, &(a, b, c, d, e, f))| {
                    DocComparison::new(i.to_string(), f1s(a, b, c), f1s(d, e, f), a, d, i)
                })
                .collect();
            let s = bin_summary(&cs);
            prop_assert_eq!(s.bins.iter().map(|r| r.count).sum::<usize>(), cs.len());
            for c in &cs {
                let flipped = c.swapped();
                prop_assert_eq!(flipped.rg_diff, -c.rg_diff);
                let expect = match c.bin() {
                    BinLabel::Improved => BinLabel::Declined,
                    BinLabel::Declined => BinLabel::Improved,
                    BinLabel::Tied => BinLabel::Tied,
                };
                prop_assert_eq!(flipped.bin(), expect);
            }
        }
    }
}
