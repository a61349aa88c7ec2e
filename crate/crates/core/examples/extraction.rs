// Top-k extraction from sentence scores, with and without trigram blocking.

use extsumm::corpus::{parse_line, SectionKeywordMap};
use extsumm::extract_summary;

const DOC: &str = r#"{"id": "d1",
  "sentences": [
    {"text": "The section head improves extraction quality.", "section": "Results"},
    {"text": "Indeed, the section head improves extraction on arXiv.", "section": "Results"},
    {"text": "Longer summaries benefit the most.", "section": "Analysis"},
    {"text": "Code is available online.", "section": "Conclusion"}
  ],
  "summary": "unused"}"#;

pub fn run_example() -> extsumm::Result<()> {
    let doc = parse_line(DOC, &SectionKeywordMap::default())?;
    let scorer = |_: &extsumm::Document| vec![0.9, 0.8, 0.6, 0.1];
    for blocking in [false, true] {
        let r = extract_summary(&doc, &scorer, 2, blocking)?;
        println!(
            "trigram_blocking={blocking}: {:?} {}",
            r.selected, r.summary_text
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> extsumm::Result<()> {
    run_example()
}
