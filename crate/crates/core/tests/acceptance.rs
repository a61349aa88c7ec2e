//! Acceptance suite. Each test prints one PASS/FAIL line for its criterion
//! (visible without `--nocapture`) and then asserts.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use extsumm::analysis::{
    bin_summary, compare, equal_count_sizes, heatmap_export, held_out_metrics, length_bins,
    write_bins_csv, write_comparisons_csv, write_heatmap_csv, write_length_bins_csv, BinLabel,
    DocComparison, HeldOutMetrics, RougeF1, HEATMAP_THRESHOLD,
};
use extsumm::config::RunConfig;
use extsumm::corpus::{filter_long, is_long, parse_line, SectionKeywordMap};
use extsumm::inference::{extract_summary, InferenceConfig};
use extsumm::io::write_jsonl;
use extsumm::model::{
    batch_loss, batch_loss_and_grad, loss_multi, loss_section, loss_selection, DocInput, Example,
    ModelConfig, Params,
};
use extsumm::oracle::{
    brute_force_oracle, greedy_oracle, greedy_oracle_trace, label_corpus, GainMetric, OracleConfig,
    PerDatasetConfig,
};
use extsumm::rouge::{lcs_len, rouge_l, rouge_n, RougeScore};
use extsumm::synth::{gen_synthetic_docs, random_small_doc, SynthConfig, SynthRng};
use extsumm::trainer::{select_best, train, TrainConfig};
use extsumm::{Document, Summarizer};
use ndarray::Array2;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};

struct Check {
    label: String,
    ok: bool,
}

fn check(label: impl Into<String>, ok: bool) -> Check {
    Check {
        label: label.into(),
        ok,
    }
}

/// Prints the criterion line straight to stderr (bypassing test capture) and asserts.
fn report(id: usize, title: &str, mut checks: Vec<Check>, elapsed: Duration, limit: Duration) {
    checks.push(check(
        format!(
            "runtime {:.1}s < {}s",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
        elapsed < limit,
    ));
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.ok)
        .map(|c| c.label.as_str())
        .collect();
    let status = if failed.is_empty() { "PASS" } else { "FAIL" };
    let detail: Vec<&str> = checks.iter().map(|c| c.label.as_str()).collect();
    let _ = writeln!(
        std::io::stderr(),
        "[{status}] criterion {id}: {title} | {}",
        detail.join("; ")
    );
    assert!(failed.is_empty(), "criterion {id} failed: {failed:?}");
}

fn toks(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn doc_from(id: &str, sentences: &[&str], summary: &str) -> Document {
    let sents: Vec<serde_json::Value> = sentences
        .iter()
        .map(|t| serde_json::json!({"text": t, "section": "Introduction"}))
        .collect();
    let line = serde_json::json!({"id": id, "sentences": sents, "summary": summary}).to_string();
    parse_line(&line, &SectionKeywordMap::default()).unwrap()
}

// ---------------------------------------------------------------------------
// 1. ROUGE correctness

enum Variant {
    N(usize),
    L,
}

/// Longest common subsequence by enumerating every subsequence of `a`.
fn exhaustive_lcs(a: &[u8], b: &[u8]) -> usize {
    let is_subsequence = |sub: &[u8]| {
        let mut it = b.iter();
        sub.iter().all(|x| it.any(|y| y == x))
    };
    (0u32..1 << a.len())
        .map(|mask| {
            let sub: Vec<u8> = (0..a.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| a[i])
                .collect();
            if is_subsequence(&sub) {
                sub.len()
            } else {
                0
            }
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn criterion_1_rouge_correctness() {
    let start = Instant::now();
    let f = |p: f64, r: f64| {
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    };
    // (candidate, reference, variant, precision, recall)
    let fixtures: Vec<(&str, &str, Variant, f64, f64)> = vec![
        ("a b c", "a b c", Variant::N(1), 1.0, 1.0),
        ("the cat sat", "the cat", Variant::N(1), 2.0 / 3.0, 1.0),
        ("a b c", "a b d", Variant::N(2), 0.5, 0.5),
        ("a c b", "a b c", Variant::L, 2.0 / 3.0, 2.0 / 3.0),
        ("x y", "a b", Variant::L, 0.0, 0.0),
        ("", "a b", Variant::N(1), 0.0, 0.0),
        ("", "a b", Variant::L, 0.0, 0.0),
        ("a a a", "a b", Variant::N(1), 1.0 / 3.0, 0.5),
        ("a b", "a a a", Variant::N(1), 0.5, 1.0 / 3.0),
        ("a b a b", "a b c", Variant::N(2), 1.0 / 3.0, 0.5),
        ("a b c d", "b c d e", Variant::N(3), 0.5, 0.5),
        ("a", "a b", Variant::N(2), 0.0, 0.0),
        ("a b c d", "a c", Variant::L, 0.5, 1.0),
        (
            "the cat sat on the mat",
            "the cat on the mat",
            Variant::L,
            5.0 / 6.0,
            1.0,
        ),
        (
            "the cat sat on the mat",
            "the cat on the mat",
            Variant::N(1),
            5.0 / 6.0,
            1.0,
        ),
        (
            "the cat sat on the mat",
            "the cat on the mat",
            Variant::N(2),
            0.6,
            0.75,
        ),
        (
            "a b c b d a b",
            "b d c a b a",
            Variant::L,
            4.0 / 7.0,
            4.0 / 6.0,
        ),
        ("c b a", "a b c", Variant::N(1), 1.0, 1.0),
        ("c b a", "a b c", Variant::N(2), 0.0, 0.0),
        ("c b a", "a b c", Variant::L, 1.0 / 3.0, 1.0 / 3.0),
        ("the cat sat", "the cat", Variant::N(2), 0.5, 1.0),
        ("the cat sat", "the cat", Variant::L, 2.0 / 3.0, 1.0),
        ("a b", "", Variant::N(1), 0.0, 0.0),
        ("a b c", "a b c", Variant::L, 1.0, 1.0),
    ];
    let expected_f1 = [
        1.0,
        0.8,
        0.5,
        2.0 / 3.0,
        0.0,
        0.0,
        0.0,
        0.4,
        0.4,
        0.4,
        0.5,
        0.0,
        2.0 / 3.0,
        10.0 / 11.0,
        10.0 / 11.0,
        2.0 / 3.0,
        8.0 / 13.0,
        1.0,
        0.0,
        1.0 / 3.0,
        2.0 / 3.0,
        0.8,
        0.0,
        1.0,
    ];
    let mut fixture_failures = Vec::new();
    for (i, ((cand, reference, variant, p, r), f1)) in fixtures.iter().zip(expected_f1).enumerate()
    {
        let (c, rf) = (toks(cand), toks(reference));
        let got: RougeScore = match variant {
            Variant::N(n) => rouge_n(&c, &rf, *n).unwrap(),
            Variant::L => rouge_l(&c, &rf),
        };
        let ok = close(got.precision, *p, 1e-9)
            && close(got.recall, *r, 1e-9)
            && close(got.f1, f1, 1e-9)
            && close(f(*p, *r), f1, 1e-12);
        if !ok {
            fixture_failures.push(i);
        }
    }

    let mut rng = SynthRng::seed_from_u64(11);
    let mut lcs_mismatch = 0;
    for _ in 0..200 {
        let la = rng.random_range(0..=8);
        let lb = rng.random_range(0..=8);
        let a: Vec<u8> = (0..la).map(|_| rng.random_range(0..4)).collect();
        let b: Vec<u8> = (0..lb).map(|_| rng.random_range(0..4)).collect();
        let (sa, sb): (Vec<String>, Vec<String>) = (
            a.iter().map(u8::to_string).collect(),
            b.iter().map(u8::to_string).collect(),
        );
        if lcs_len(&sa, &sb) != exhaustive_lcs(&a, &b) {
            lcs_mismatch += 1;
        }
    }
    report(
        1,
        "ROUGE correctness",
        vec![
            check(
                format!(
                    "{} fixtures, mismatches {:?} (tol 1e-9)",
                    fixtures.len(),
                    fixture_failures
                ),
                fixtures.len() >= 20 && fixture_failures.is_empty(),
            ),
            check(
                format!("LCS vs exhaustive on 200 pairs: {lcs_mismatch} mismatches"),
                lcs_mismatch == 0,
            ),
        ],
        start.elapsed(),
        Duration::from_secs(10),
    );
}

// ---------------------------------------------------------------------------
// 2. Oracle labeling

#[test]
fn criterion_2_oracle_labeling() {
    let start = Instant::now();
    let metric = GainMetric::MeanRg1Rg2;
    let mut rng = SynthRng::seed_from_u64(22);
    let (mut brute_below, mut k1_mismatch, mut non_monotone) = (0, 0, 0);
    for i in 0..50 {
        let doc = random_small_doc(&mut rng, &format!("r{i}"), 8);
        let k = rng.random_range(1..=3);
        let trace =
            greedy_oracle_trace(&doc, &OracleConfig::new(k, metric, false).unwrap()).unwrap();
        let greedy_labels = trace.labels(doc.sentences.len());
        let picked: Vec<usize> = (0..greedy_labels.len())
            .filter(|&j| greedy_labels[j])
            .collect();
        let greedy_score = if picked.is_empty() {
            0.0
        } else {
            metric.score(&doc.tokens_of(&picked), &doc.summary_tokens)
        };
        let (_, brute_score) = brute_force_oracle(&doc, k, metric).unwrap();
        if brute_score + 1e-12 < greedy_score {
            brute_below += 1;
        }

        let mut prev = 0.0;
        for step in &trace.steps {
            if step.score <= prev {
                non_monotone += 1;
            }
            prev = step.score;
        }

        let greedy_k1 = greedy_oracle(&doc, &OracleConfig::new(1, metric, false).unwrap()).unwrap();
        let (brute_k1, _) = brute_force_oracle(&doc, 1, metric).unwrap();
        if greedy_k1 != brute_k1 {
            k1_mismatch += 1;
        }
    }
    report(
        2,
        "oracle labeling",
        vec![
            check(
                format!("brute < greedy in {brute_below}/50"),
                brute_below == 0,
            ),
            check(
                format!("k=1 greedy != brute in {k1_mismatch}/50"),
                k1_mismatch == 0,
            ),
            check(
                format!("non-increasing gain steps {non_monotone}"),
                non_monotone == 0,
            ),
        ],
        start.elapsed(),
        Duration::from_secs(30),
    );
}

// ---------------------------------------------------------------------------
// 3. Losses and gradients

fn tiny_model(seed: u64) -> (ModelConfig, Params, Vec<Example>) {
    let cfg = ModelConfig {
        d: 8,
        vocab_size: 12,
        n_context_layers: 2,
        n_heads: 2,
        sections: 7,
        alpha: 0.5,
        max_sentences: 6,
        dropout: 0.0,
        seed,
    };
    let mut rng = SynthRng::seed_from_u64(seed);
    let mut params = Params::init(&cfg, &mut rng);
    for (_, mut t) in params.tensors_mut() {
        t.mapv_inplace(|x| x + rng.random_range(-0.3..0.3));
    }
    let batch = (0..2)
        .map(|_| {
            let m = rng.random_range(2..=5);
            Example {
                input: DocInput {
                    sentences: (0..m)
                        .map(|_| {
                            (0..rng.random_range(1..=4))
                                .map(|_| rng.random_range(0..12))
                                .collect()
                        })
                        .collect(),
                },
                select_labels: (0..m).map(|_| rng.random_bool(0.4)).collect(),
                section_labels: (0..m).map(|_| rng.random_range(0..7)).collect(),
            }
        })
        .collect();
    (cfg, params, batch)
}

struct TensorGradCheck {
    name: String,
    entries: usize,
    /// Entries whose gradient is numerically zero (both values within 1e-9).
    near_zero: usize,
    /// Worst relative error over the remaining entries.
    worst_rel: f64,
    pass: bool,
}

/// Central finite differences against the analytic gradient, per tensor. An
/// entry passes at relative error below 1e-4, or when both values are within 1e-9.
fn gradient_errors(cfg: &ModelConfig, params: &Params, batch: &[Example]) -> Vec<TensorGradCheck> {
    let h = 1e-5;
    let (_, grads) = batch_loss_and_grad(params, cfg, batch, None).unwrap();
    let mut probe = params.clone();
    grads
        .tensors()
        .into_iter()
        .enumerate()
        .map(|(ti, (name, g))| {
            let (mut worst_rel, mut near_zero, mut pass) = (0.0f64, 0, true);
            for (j, &a) in g.iter().enumerate() {
                let orig = probe.tensors()[ti].1.as_slice().unwrap()[j];
                let mut loss_at = |v: f64| {
                    probe.tensors_mut()[ti].1.as_slice_mut().unwrap()[j] = v;
                    batch_loss(&probe, cfg, batch, None).unwrap().total
                };
                let numeric = (loss_at(orig + h) - loss_at(orig - h)) / (2.0 * h);
                loss_at(orig);
                let diff = (a - numeric).abs();
                let scale = a.abs().max(numeric.abs());
                if diff <= 1e-9 && scale <= 1e-6 {
                    near_zero += 1;
                } else {
                    worst_rel = worst_rel.max(diff / scale);
                    pass &= diff <= 1e-9 || diff < 1e-4 * scale;
                }
            }
            TensorGradCheck {
                name,
                entries: g.len(),
                near_zero,
                worst_rel,
                pass,
            }
        })
        .collect()
}

#[test]
fn criterion_3_losses_and_gradients() {
    let start = Instant::now();
    let mut rng = SynthRng::seed_from_u64(33);
    let mut alpha_ok = true;
    for _ in 0..100 {
        let (l1, l2) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
        alpha_ok &= close(loss_multi(l1, l2, 1.0).unwrap(), l1, 1e-12);
        alpha_ok &= close(loss_multi(l1, l2, 0.0).unwrap(), l2, 1e-12);
    }

    let ln2 = loss_selection(&[0.5, 0.5], &[true, false]).unwrap();
    let neg_ln_09 = loss_selection(&[0.9], &[true]).unwrap();
    let ln7 = loss_section(&Array2::from_elem((3, 7), 1.0 / 7.0), &[0, 3, 6]).unwrap();
    let hand = close(ln2, 2f64.ln(), 1e-9)
        && close(neg_ln_09, -(0.9f64.ln()), 1e-9)
        && close(ln7, 7f64.ln(), 1e-9);

    let (mut tensors, mut entries, mut near_zero, mut failing) = (0, 0, 0, Vec::new());
    let mut worst = (String::new(), 0.0f64);
    for seed in [1u64, 2, 3] {
        let (cfg, params, batch) = tiny_model(seed);
        for t in gradient_errors(&cfg, &params, &batch) {
            tensors += 1;
            entries += t.entries;
            near_zero += t.near_zero;
            if !t.pass {
                failing.push(format!("seed {seed} {}", t.name));
            }
            if t.worst_rel > worst.1 {
                worst = (format!("seed {seed} {}", t.name), t.worst_rel);
            }
        }
    }
    report(
        3,
        "loss/gradient suite",
        vec![
            check("alpha=1 is L1, alpha=0 is L2 (1e-12)", alpha_ok),
            check(
                format!("ln2 {ln2:.9}, ln7 {ln7:.9}, -ln0.9 {neg_ln_09:.9} (1e-9)"),
                hand,
            ),
            check(
                format!(
                    "3 seeds, {tensors} tensors, {entries} entries ({near_zero} numerically zero), failing {failing:?}, worst rel err {:.2e} ({})",
                    worst.1, worst.0
                ),
                failing.is_empty(),
            ),
        ],
        start.elapsed(),
        Duration::from_secs(60),
    );
}

// ---------------------------------------------------------------------------
// 4 and 8. Synthetic end-to-end training, and its reproducibility

const E2E_STEPS: usize = 600;
const E2E_TOP_K: usize = 3;

struct E2eRun {
    multi: HeldOutMetrics,
    base: HeldOutMetrics,
    loss_first: f64,
    loss_last: f64,
    files: BTreeMap<String, Vec<u8>>,
    elapsed: Duration,
}

fn labeled_corpus(num_docs: usize, seed: u64) -> Vec<Document> {
    let cfg = SynthConfig::new(num_docs, 12, 7, seed);
    let mut docs = gen_synthetic_docs(&cfg).unwrap();
    let oracle = OracleConfig::new(cfg.planted_per_doc, GainMetric::MeanRg1Rg2, false).unwrap();
    label_corpus(&mut docs, &PerDatasetConfig::uniform(oracle)).unwrap();
    docs
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_files(root, &path, out);
        } else {
            let rel = path
                .strip_prefix(root)
                .unwrap()
                .to_string_lossy()
                .into_owned();
            out.insert(rel, std::fs::read(&path).unwrap());
        }
    }
}

/// Trains the multi-task model and the selection-only baseline, predicts on
/// the validation split and writes the analysis CSVs under `root`.
fn run_e2e(root: &Path) -> E2eRun {
    let start = Instant::now();
    let train_docs = labeled_corpus(500, 101);
    let val_docs = labeled_corpus(100, 202);
    let train_cfg = TrainConfig {
        max_steps: E2E_STEPS,
        val_interval: 100,
        top_k: E2E_TOP_K,
        seed: 9,
        ..TrainConfig::default()
    };
    let mut models = Vec::new();
    let mut losses = (0.0, 0.0);
    for (name, alpha) in [("multi", 0.5), ("base", 1.0)] {
        let model_cfg = ModelConfig {
            d: 64,
            n_context_layers: 2,
            alpha,
            seed: 9,
            ..ModelConfig::default()
        };
        let report = train(
            &train_docs,
            &val_docs,
            &model_cfg,
            &train_cfg,
            &root.join(name),
        )
        .unwrap();
        if name == "multi" {
            losses = (
                report.metrics[0].train_loss,
                report.metrics.last().unwrap().train_loss,
            );
        }
        let (model, _) = Summarizer::load(&select_best(&report.checkpoints).unwrap().path).unwrap();
        let results: Vec<_> = val_docs
            .iter()
            .map(|d| extract_summary(d, &model, E2E_TOP_K, false).unwrap())
            .collect();
        let records: Vec<_> = results.iter().map(|r| r.to_record()).collect();
        write_jsonl(&root.join(format!("{name}.pred.jsonl")), &records).unwrap();
        models.push((model, results));
    }

    let report_dir = root.join("report");
    std::fs::create_dir_all(&report_dir).unwrap();
    let comparisons: Vec<DocComparison> = val_docs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            compare(
                d,
                &models[1].1[i],
                &models[0].1[i],
                &d.oracle_labels().unwrap(),
            )
            .unwrap()
        })
        .collect();
    write_comparisons_csv(&report_dir.join("comparisons.csv"), &comparisons).unwrap();
    write_bins_csv(&report_dir.join("bins.csv"), &bin_summary(&comparisons)).unwrap();
    write_length_bins_csv(
        &report_dir.join("length_bins.csv"),
        &length_bins(&comparisons, 5).unwrap(),
    )
    .unwrap();
    let shown = &models[0].1[0];
    let rows = heatmap_export(
        &val_docs[0],
        &shown.probs,
        &shown.selected,
        &val_docs[0].oracle_labels().unwrap(),
        HEATMAP_THRESHOLD,
    )
    .unwrap();
    write_heatmap_csv(
        &report_dir.join(format!("heatmap_{}.csv", val_docs[0].id)),
        &rows,
    )
    .unwrap();

    let multi = held_out_metrics(&models[0].0, &val_docs, E2E_TOP_K).unwrap();
    let base = held_out_metrics(&models[1].0, &val_docs, E2E_TOP_K).unwrap();
    let elapsed = start.elapsed();
    let mut files = BTreeMap::new();
    collect_files(root, root, &mut files);
    E2eRun {
        multi,
        base,
        loss_first: losses.0,
        loss_last: losses.1,
        files,
        elapsed,
    }
}

static FIRST_RUN: OnceLock<(tempfile::TempDir, E2eRun)> = OnceLock::new();

fn first_run() -> &'static E2eRun {
    let (_, run) = FIRST_RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let run = run_e2e(dir.path());
        (dir, run)
    });
    run
}

#[test]
fn criterion_4_synthetic_end_to_end() {
    let run = first_run();
    let chance = 1.0 / 7.0;
    report(
        4,
        "synthetic end-to-end (500/100 docs, d=64, 2 layers, 600 steps)",
        vec![
            check(
                format!("selection F1 {:.3} >= 0.7", run.multi.selection_f1),
                run.multi.selection_f1 >= 0.7,
            ),
            check(
                format!("section accuracy {:.3} >= 0.9", run.multi.section_accuracy),
                run.multi.section_accuracy >= 0.9,
            ),
            check(
                format!(
                    "alpha=1 true-section prob {:.4} within 0.05 of {chance:.4}",
                    run.base.mean_true_section_prob
                ),
                (run.base.mean_true_section_prob - chance).abs() <= 0.05,
            ),
            check(
                format!("train loss {:.4} -> {:.4}", run.loss_first, run.loss_last),
                run.loss_last < run.loss_first,
            ),
        ],
        run.elapsed,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_8_determinism() {
    let start = Instant::now();
    let first = first_run();
    let dir = tempfile::tempdir().unwrap();
    let second = run_e2e(dir.path());
    let same_names = first.files.keys().eq(second.files.keys());
    let differing: Vec<&String> = first
        .files
        .iter()
        .filter(|(k, v)| second.files.get(*k) != Some(*v))
        .map(|(k, _)| k)
        .collect();
    let count = |pred: fn(&str) -> bool| first.files.keys().filter(|k| pred(k)).count();
    report(
        8,
        "determinism",
        vec![check(
            format!(
                "{} files ({} checkpoints, {} prediction files, {} CSVs) identical, {} differ",
                first.files.len(),
                count(|k| k.contains("ckpt_")),
                count(|k| k.ends_with(".pred.jsonl")),
                count(|k| k.ends_with(".csv")),
                differing.len()
            ),
            same_names && differing.is_empty(),
        )],
        start.elapsed(),
        Duration::from_secs(300),
    );
}

// ---------------------------------------------------------------------------
// 5. Dataset filtering

fn summary_doc(id: usize, summary_len: usize) -> Document {
    doc_from(
        &format!("d{id}"),
        &["one sentence"],
        &vec!["w"; summary_len].join(" "),
    )
}

#[test]
fn criterion_5_dataset_filtering() {
    let start = Instant::now();
    let boundary = !is_long(&summary_doc(0, 349), 350) && is_long(&summary_doc(1, 350), 350);
    let preset = RunConfig {
        dataset: "arxiv-long".parse().unwrap(),
        ..RunConfig::default()
    }
    .min_summary_tokens()
        == 350;

    let corpus = prop::collection::vec(0usize..700, 0..20);
    let ids = |c: &[Document]| c.iter().map(|d| d.id.clone()).collect::<Vec<_>>();
    let mut runner = TestRunner::new(PropConfig::with_cases(64));
    let idempotent = runner
        .run(&(corpus.clone(), 0usize..700), |(lens, t)| {
            let docs: Vec<Document> = lens
                .iter()
                .enumerate()
                .map(|(i, &n)| summary_doc(i, n))
                .collect();
            let once = filter_long(&docs, t);
            prop_assert_eq!(ids(&filter_long(&once, t)), ids(&once));
            Ok(())
        })
        .is_ok();
    let mut runner = TestRunner::new(PropConfig::with_cases(64));
    let monotone = runner
        .run(&(corpus, 0usize..700, 0usize..700), |(lens, a, b)| {
            let (lo, hi) = (a.min(b), a.max(b));
            let docs: Vec<Document> = lens
                .iter()
                .enumerate()
                .map(|(i, &n)| summary_doc(i, n))
                .collect();
            let loose: HashSet<String> = ids(&filter_long(&docs, lo)).into_iter().collect();
            prop_assert!(ids(&filter_long(&docs, hi))
                .iter()
                .all(|id| loose.contains(id)));
            Ok(())
        })
        .is_ok();
    report(
        5,
        "dataset filtering",
        vec![
            check("349 excluded, 350 included", boundary),
            check("arxiv-long preset threshold 350", preset),
            check("filter idempotence (64 cases)", idempotent),
            check("threshold monotonicity (64 cases)", monotone),
        ],
        start.elapsed(),
        Duration::from_secs(5),
    );
}

// ---------------------------------------------------------------------------
// 6. Analysis suite

#[test]
fn criterion_6_analysis_suite() {
    let start = Instant::now();
    let mut rng = SynthRng::seed_from_u64(66);
    let rouge = |rng: &mut SynthRng| RougeF1 {
        rg1: rng.random(),
        rg2: rng.random(),
        rgl: rng.random(),
    };
    let comparisons: Vec<DocComparison> = (0..1000)
        .map(|i| {
            let base = rouge(&mut rng);
            let model = if rng.random_bool(0.1) {
                base
            } else {
                rouge(&mut rng)
            };
            DocComparison::new(
                format!("c{i}"),
                base,
                model,
                rng.random(),
                rng.random(),
                rng.random_range(1..2000),
            )
        })
        .collect();
    let summary = bin_summary(&comparisons);
    let counts: Vec<usize> = BinLabel::ALL
        .iter()
        .map(|&l| summary.get(l).count)
        .collect();
    let partition = counts.iter().sum::<usize>() == 1000 && summary.total.count == 1000;
    let in_band = comparisons
        .iter()
        .filter(|c| c.rg_diff != 0.0 && c.rg_diff.abs() < 5e-5)
        .count();
    let sign_rule = comparisons.iter().all(|c| {
        let expected = if c.rg_diff > 0.0 {
            BinLabel::Improved
        } else if c.rg_diff < 0.0 {
            BinLabel::Declined
        } else {
            BinLabel::Tied
        };
        c.bin() == expected
    });

    let fixed_bins =
        equal_count_sizes(155, 5) == vec![31; 5] && equal_count_sizes(1960, 10) == vec![196; 10];
    let balanced = (1..=300).all(|n| {
        (1..=n.min(12)).all(|b| {
            let sizes = equal_count_sizes(n, b);
            sizes.iter().sum::<usize>() == n
                && sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1
        })
    });
    let bins_from_comparisons = length_bins(&comparisons[..155], 5)
        .unwrap()
        .iter()
        .all(|b| b.size == 31);

    let mut heatmap_ok = true;
    for trial in 0..50 {
        let m = rng.random_range(1..15);
        let texts: Vec<String> = (0..m).map(|i| format!("s{i} w{trial}")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let doc = doc_from("h", &refs, "w");
        let probs: Vec<f64> = (0..m)
            .map(|_| {
                if rng.random_bool(0.2) {
                    0.15
                } else {
                    rng.random()
                }
            })
            .collect();
        let labels = vec![false; m];
        let rows = heatmap_export(&doc, &probs, &[], &labels, HEATMAP_THRESHOLD).unwrap();
        let got: Vec<usize> = rows.iter().map(|r| r.position).collect();
        let expected: Vec<usize> = (0..m).filter(|&i| probs[i] > 0.15).collect();
        heatmap_ok &= got == expected;
    }
    let fixed = doc_from("f", &["a", "b", "c"], "a");
    let fixed_rows =
        heatmap_export(&fixed, &[0.9, 0.10, 0.2], &[0], &[true, false, false], 0.15).unwrap();
    heatmap_ok &= fixed_rows.iter().map(|r| r.position).collect::<Vec<_>>() == [0, 2];

    report(
        6,
        "analysis suite",
        vec![
            check(
                format!("1000 comparisons -> improved/tied/declined {counts:?}, sums to total"),
                partition,
            ),
            check(
                format!("label matches sign of rg_diff ({in_band} with 0 < |rg_diff| < 5e-5)"),
                sign_rule,
            ),
            check(
                "155 -> 5x31, 1960 -> 10x196",
                fixed_bins && bins_from_comparisons,
            ),
            check("bin sizes differ by <= 1 for n <= 300", balanced),
            check("heatmap keeps exactly prob > 0.15 (51 docs)", heatmap_ok),
        ],
        start.elapsed(),
        Duration::from_secs(10),
    );
}

// ---------------------------------------------------------------------------
// 7. Inference

#[test]
fn criterion_7_inference() {
    let start = Instant::now();
    let mut rng = SynthRng::seed_from_u64(77);
    let mut topk_mismatch = 0;
    for trial in 0..100 {
        let m = rng.random_range(1..25);
        let k = rng.random_range(1..10);
        let probs: Vec<f64> = (0..m)
            .map(|_| {
                if rng.random_bool(0.3) {
                    rng.random_range(0..4) as f64 / 4.0
                } else {
                    rng.random()
                }
            })
            .collect();
        let texts: Vec<String> = (0..m).map(|i| format!("t{trial} s{i}")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let doc = doc_from("k", &refs, "x");
        let scorer = |_: &Document| probs.clone();
        let got = extract_summary(&doc, &scorer, k, false).unwrap().selected;
        // Rank of i = number of entries ahead of it (higher prob, or equal prob at a lower position).
        let expected: Vec<usize> = (0..m)
            .filter(|&i| {
                (0..m)
                    .filter(|&j| probs[j] > probs[i] || (probs[j] == probs[i] && j < i))
                    .count()
                    < k
            })
            .collect();
        if got != expected {
            topk_mismatch += 1;
        }
    }

    // (sentences, probs, k, selected with blocking, selected without)
    type Fixture = (
        &'static [&'static str],
        &'static [f64],
        usize,
        &'static [usize],
        &'static [usize],
    );
    let fixtures: [Fixture; 5] = [
        (
            &["a b c d", "x b c d", "e f g"],
            &[0.9, 0.8, 0.7],
            2,
            &[0, 2],
            &[0, 1],
        ),
        (
            &["a b c", "a b", "c a b"],
            &[0.5, 0.9, 0.8],
            2,
            &[1, 2],
            &[1, 2],
        ),
        (
            &["p q r s", "q r s t", "r s t u"],
            &[0.3, 0.2, 0.1],
            3,
            &[0, 2],
            &[0, 1, 2],
        ),
        (
            &["m n o", "m n o", "z y x", "w v u"],
            &[0.4, 0.9, 0.8, 0.1],
            2,
            &[1, 2],
            &[1, 2],
        ),
        (
            &["a b c d", "a b c e", "f g h"],
            &[0.5, 0.5, 0.5],
            2,
            &[0, 2],
            &[0, 1],
        ),
    ];
    let mut blocking_mismatch = Vec::new();
    for (i, (sents, probs, k, blocked, plain)) in fixtures.iter().enumerate() {
        let doc = doc_from("b", sents, "x");
        let scorer = |_: &Document| probs.to_vec();
        let on = extract_summary(&doc, &scorer, *k, true).unwrap().selected;
        let off = extract_summary(&doc, &scorer, *k, false).unwrap().selected;
        if on != *blocked || off != *plain {
            blocking_mismatch.push(i);
        }
    }

    let defaults_off =
        !InferenceConfig::top_k(3).trigram_blocking && !RunConfig::default().trigram_blocking;
    report(
        7,
        "inference",
        vec![
            check(
                format!("top-k vs rank oracle: {topk_mismatch}/100 mismatches"),
                topk_mismatch == 0,
            ),
            check(
                format!("5 blocking fixtures, mismatches {blocking_mismatch:?}"),
                blocking_mismatch.is_empty(),
            ),
            check("trigram blocking off by default", defaults_off),
        ],
        start.elapsed(),
        Duration::from_secs(5),
    );
}
