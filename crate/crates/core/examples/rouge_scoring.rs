// ROUGE-1/2/L precision, recall and F1 for a candidate against a reference.

use extsumm::corpus::tokenize;
use extsumm::rouge::{lcs_len, rouge_suite};

pub fn run_example() -> extsumm::Result<()> {
    let reference = tokenize("The model learns which section each sentence belongs to.");
    let candidates = [
        "The model learns which section each sentence belongs to.",
        "Each sentence belongs to a section the model learns.",
        "Results are reported on three datasets.",
    ];
    println!(
        "{:<58} {:>6} {:>6} {:>6}",
        "candidate", "RG-1", "RG-2", "RG-L"
    );
    for text in candidates {
        let cand = tokenize(text);
        let s = rouge_suite(&cand, &reference);
        println!(
            "{text:<58} {:>6.3} {:>6.3} {:>6.3}",
            s.rouge1.f1, s.rouge2.f1, s.rouge_l.f1
        );
    }
    println!(
        "lcs(abcbdab, bdcaba) = {}",
        lcs_len(
            &["a", "b", "c", "b", "d", "a", "b"],
            &["b", "d", "c", "a", "b", "a"]
        )
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> extsumm::Result<()> {
    run_example()
}
