// Greedy oracle labels with and without the section-diversity rule,
// checked against exhaustive search on a small document.

use extsumm::corpus::{parse_line, SectionKeywordMap};
use extsumm::oracle::{brute_force_oracle, greedy_oracle_trace, GainMetric, OracleConfig};

const DOC: &str = r#"{"id": "paper-1",
  "sentences": [
    {"text": "We study summaries of long scientific papers.", "section": "1 Introduction"},
    {"text": "Long papers need long summaries.", "section": "1 Introduction"},
    {"text": "Our model predicts the section of every sentence.", "section": "3 Proposed Method"},
    {"text": "The section head is trained jointly with the extractor.", "section": "3 Proposed Method"},
    {"text": "We thank the reviewers.", "section": "Acknowledgements"},
    {"text": "Joint training improves ROUGE on long summaries.", "section": "5 Results"}
  ],
  "summary": "Long scientific papers need long summaries. Our model predicts the section of every sentence, trained jointly with the extractor, and improves ROUGE."}"#;

pub fn run_example() -> extsumm::Result<()> {
    let doc = parse_line(DOC, &SectionKeywordMap::default())?;
    for diversity in [false, true] {
        let cfg = OracleConfig::new(3, GainMetric::MeanRg1Rg2, diversity)?;
        let trace = greedy_oracle_trace(&doc, &cfg)?;
        println!("diversity={diversity}");
        for step in &trace.steps {
            let s = &doc.sentences[step.position];
            println!(
                "  pick {} [{}] score {:.4}{}  {}",
                step.position,
                s.section_category,
                step.score,
                if step.restricted { " (restricted)" } else { "" },
                s.text
            );
        }
    }
    let (labels, best) = brute_force_oracle(&doc, 3, GainMetric::MeanRg1Rg2)?;
    let picked: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    println!("exhaustive best {picked:?} score {best:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> extsumm::Result<()> {
    run_example()
}
