// Compares two systems per document: Improved/Tied/Declined bins, equal-count
// length bins and a probability heatmap rendered as SVG.

use extsumm::analysis::{
    bin_summary, compare, heatmap_export, length_bins, selection_f1, HEATMAP_THRESHOLD,
};
use extsumm::inference::extract_summary;
use extsumm::oracle::{label_corpus, GainMetric, OracleConfig, PerDatasetConfig};
use extsumm::plot::{heatmap_svg, HeatmapCsv};
use extsumm::synth::{gen_synthetic_docs, SynthConfig};
use extsumm::Document;

pub fn run_example() -> extsumm::Result<()> {
    let mut docs = Vec::new();
    for planted in 2..=5 {
        let cfg = SynthConfig {
            planted_per_doc: planted,
            ..SynthConfig::new(10, 10, 7, planted as u64)
        };
        for mut d in gen_synthetic_docs(&cfg)? {
            d.id = format!("p{planted}-{}", d.id);
            docs.push(d);
        }
    }
    let oracle = OracleConfig::new(3, GainMetric::MeanRg1Rg2, false)?;
    label_corpus(&mut docs, &PerDatasetConfig::uniform(oracle))?;

    // Baseline: leading sentences. Model: planted positives first on two of
    // every three documents, trailing sentences on the rest.
    let lead = |d: &Document| {
        (0..d.sentences.len())
            .map(|i| 1.0 / (1.0 + i as f64))
            .collect::<Vec<f64>>()
    };
    let planted = |d: &Document| {
        let p = d.planted_positives.clone().unwrap_or_default();
        (0..d.sentences.len())
            .map(|i| if p.contains(&i) { 0.8 } else { 0.05 })
            .collect::<Vec<f64>>()
    };

    let trail = |d: &Document| {
        (0..d.sentences.len())
            .map(|i| i as f64 / 10.0)
            .collect::<Vec<f64>>()
    };

    let mut comparisons = Vec::new();
    for (i, doc) in docs.iter().enumerate() {
        let labels = doc.oracle_labels().expect("labeled above");
        let base = extract_summary(doc, &lead, 3, false)?;
        let model = if i % 3 == 2 {
            extract_summary(doc, &trail, 3, false)?
        } else {
            extract_summary(doc, &planted, 3, false)?
        };
        comparisons.push(compare(doc, &base, &model, &labels)?);
    }
    for row in bin_summary(&comparisons).rows() {
        println!(
            "{:<9} n={:<3} rg_diff {:+.4} f_diff {:+.4}",
            row.bin, row.count, row.mean_rg_diff, row.mean_f_diff
        );
    }
    for b in length_bins(&comparisons, 4)? {
        println!(
            "len {:>3}-{:<3} n={} base {:.3} model {:.3}",
            b.min_len,
            b.max_len,
            b.size,
            b.base.mean(),
            b.model.mean()
        );
    }

    let doc = &docs[0];
    let labels = doc.oracle_labels().expect("labeled above");
    let model = extract_summary(doc, &planted, 3, false)?;
    let rows = heatmap_export(
        doc,
        &model.probs,
        &model.selected,
        &labels,
        HEATMAP_THRESHOLD,
    )?;
    let cells: Vec<HeatmapCsv> = rows
        .iter()
        .map(|r| HeatmapCsv {
            position: r.position,
            section_category: r.section_category.to_string(),
            prob: r.prob,
            is_selected: r.is_selected,
            is_oracle: r.is_oracle,
        })
        .collect();
    let svg = heatmap_svg(&cells, &doc.id);
    println!(
        "{}: {} sentences above {HEATMAP_THRESHOLD}, selection F1 {:.3}, svg {} bytes",
        doc.id,
        rows.len(),
        selection_f1(&model.selected, &labels),
        svg.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> extsumm::Result<()> {
    run_example()
}
