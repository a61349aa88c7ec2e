// Parse raw JSONL records, canonicalize section titles, keep documents with
// long reference summaries and report corpus statistics.

use extsumm::corpus::{compute_stats, filter_long, parse_line, SectionKeywordMap};
use serde_json::json;

pub fn run_example() -> extsumm::Result<()> {
    let keywords = SectionKeywordMap::default();
    let lines: Vec<String> = [("short", 40usize), ("long", 400), ("boundary", 350)]
        .iter()
        .map(|&(id, summary_len)| {
            json!({
                "id": id,
                "sentences": [
                    {"text": "Transformers dominate summarization.", "section": "II. Related Work"},
                    {"text": "We add a section classifier.", "section": "Our Approach"},
                    {"text": "It helps on long documents.", "section": "6 Conclusions"},
                ],
                "summary": vec!["word"; summary_len].join(" "),
            })
            .to_string()
        })
        .collect();

    let docs = lines
        .iter()
        .map(|l| parse_line(l, &keywords))
        .collect::<extsumm::Result<Vec<_>>>()?;
    for s in &docs[0].sentences {
        println!("{:<28} -> {}", s.raw_section, s.section_category);
    }
    let kept = filter_long(&docs, 350);
    let ids: Vec<&str> = kept.iter().map(|d| d.id.as_str()).collect();
    println!("kept {ids:?}");
    println!("{:?}", compute_stats(&kept));
    Ok(())
}

#[allow(dead_code)]
fn main() -> extsumm::Result<()> {
    run_example()
}
