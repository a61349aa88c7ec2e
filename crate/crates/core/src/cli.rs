//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    bin_summary, compare, heatmap_export, length_bins, sanitize_id, write_bins_csv,
    write_comparisons_csv, write_heatmap_csv, write_length_bins_csv, HEATMAP_THRESHOLD,
};
use crate::config::RunConfig;
use crate::corpus::{is_long, parse_line, DatasetTag, Document, StatsAccumulator};
use crate::error::{Error, Result};
use crate::inference::{extract_with, ExtractionResult, InferenceConfig, PredictionRecord};
use crate::io::{map_lines, read_documents, read_records, write_jsonl, JsonlLines};
use crate::model::Summarizer;
use crate::oracle::{greedy_oracle, GainMetric, OracleConfig};
use crate::plot::{
    bar_chart_png, bar_chart_svg, heatmap_png, heatmap_rows, heatmap_svg, length_bin_groups,
    save_png, save_svg, ImageFormat,
};
use crate::rouge::rouge_suite;
use crate::synth::{gen_synthetic, SynthConfig};
use crate::trainer::{csv_err, select_best, train};

#[derive(Debug, Parser)]
#[command(
    name = "extsumm",
    version,
    about = "Section-aware extractive summarization toolkit"
)]
pub struct Cli {
    /// Config file (default: ./extsumm.toml when present).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-document work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Dataset preset: longsumm, arxiv-long, pubmed-long or custom.
    #[arg(long, global = true)]
    pub dataset: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        s == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    LengthBins,
    Heatmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum System {
    Base,
    Model,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse raw records, canonicalize sections and keep long-summary documents.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        min_summary_tokens: Option<usize>,
    },
    /// Print document count and mean document / summary token counts.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Attach greedy oracle labels to every document.
    LabelOracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        diversity: Option<Switch>,
        #[arg(long)]
        gain: Option<String>,
    },
    /// Train the multi-task model and keep the best validation checkpoint.
    Train(TrainArgs),
    /// Extract summaries with a trained checkpoint.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long, value_enum)]
        trigram_blocking: Option<Switch>,
    },
    /// Per-document ROUGE of predictions against reference summaries.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        refs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a baseline and a model: bins, length bins and heatmaps.
    Analyze {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        refs: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 5)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = HEATMAP_THRESHOLD)]
        heatmap_threshold: f64,
        /// Restrict heatmap files to these document ids (default: all).
        #[arg(long, value_delimiter = ',')]
        heatmap_docs: Vec<String>,
        #[arg(long, value_enum, default_value = "model")]
        heatmap_system: System,
    },
    /// Render a length-bin chart or heatmap CSV as SVG or PNG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, default_value = "svg")]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded synthetic corpus with planted positives and section markers.
    GenSynthetic {
        #[arg(long)]
        num_docs: usize,
        #[arg(long, default_value_t = 12)]
        sentences_per_doc: usize,
        #[arg(long, default_value_t = 7)]
        sections: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub val_interval: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_docs: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub heads: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    #[arg(long)]
    pub max_sentences: Option<usize>,
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::discover(cli.config.as_deref())?;
    if let Some(d) = &cli.dataset {
        cfg.dataset = d.parse()?;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        if jobs == 0 {
            return Err(Error::config("--jobs must be >= 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(|| run_command(cli.command, cfg))
}

fn run_command(command: Command, mut cfg: RunConfig) -> Result<()> {
    let keywords = cfg.keyword_map()?;
    match command {
        Command::Ingest {
            input,
            out,
            min_summary_tokens,
        } => {
            if min_summary_tokens.is_some() {
                cfg.min_summary_tokens = min_summary_tokens;
            }
            let threshold = cfg.min_summary_tokens();
            let tag = (cfg.dataset != DatasetTag::Custom).then_some(cfg.dataset);
            let kept = map_lines(&cfg.resolve_path(&input), &out, |line| {
                let mut doc = parse_line(line, &keywords)?;
                if !is_long(&doc, threshold) {
                    return Ok(None);
                }
                if doc.dataset.is_none() {
                    doc.dataset = tag;
                }
                Ok(Some(serde_json::to_string(&doc.to_record())?))
            })?;
            eprintln!("kept {kept} documents with >= {threshold} summary tokens");
        }
        Command::Stats { input } => {
            let path = cfg.resolve_path(&input);
            let mut acc = StatsAccumulator::default();
            for item in JsonlLines::open(&path)? {
                let (n, line) = item?;
                let doc =
                    parse_line(&line, &keywords).map_err(|e| crate::io::at_line(&path, n, e))?;
                acc.add(&doc);
            }
            println!("{}", serde_json::to_string(&acc.finish())?);
        }
        Command::LabelOracle {
            input,
            out,
            k,
            diversity,
            gain,
        } => {
            if let Some(k) = k {
                if k == 0 {
                    return Err(Error::config("--k must be >= 1"));
                }
                cfg.oracle_k = Some(k);
            }
            set(&mut cfg.diversity, diversity.map(bool::from));
            if let Some(g) = gain {
                cfg.gain = g.parse::<GainMetric>()?;
            }
            let base = cfg.oracle_config()?;
            map_lines(&cfg.resolve_path(&input), &out, |line| {
                let mut doc = parse_line(line, &keywords)?;
                let oracle = match (k, doc.dataset.and_then(OracleConfig::for_dataset)) {
                    (None, Some(preset)) => OracleConfig {
                        k: preset.k,
                        ..base
                    },
                    _ => base,
                };
                let labels = greedy_oracle(&doc, &oracle)?;
                doc.set_oracle_labels(&labels)?;
                Ok(Some(serde_json::to_string(&doc.to_record())?))
            })?;
        }
        Command::Train(args) => run_train(args, cfg, &keywords)?,
        Command::Predict {
            model,
            input,
            out,
            top_k,
            trigram_blocking,
        } => {
            if top_k == Some(0) {
                return Err(Error::config("--top-k must be >= 1"));
            }
            cfg.top_k = top_k.or(cfg.top_k);
            set(&mut cfg.trigram_blocking, trigram_blocking.map(bool::from));
            let (summarizer, _) = Summarizer::load(&cfg.resolve_path(&model))?;
            let infer = InferenceConfig {
                trigram_blocking: cfg.trigram_blocking,
                ..InferenceConfig::top_k(cfg.top_k())
            };
            map_lines(&cfg.resolve_path(&input), &out, |line| {
                let doc = parse_line(line, &keywords)?;
                let result = extract_with(&doc, &summarizer, &infer)?;
                Ok(Some(serde_json::to_string(&result.to_record())?))
            })?;
        }
        Command::Evaluate { pred, refs, out } => {
            let docs = index_docs(read_documents(&cfg.resolve_path(&refs), &keywords)?);
            let preds: Vec<PredictionRecord> = read_records(&cfg.resolve_path(&pred))?;
            write_evaluation(&out, &preds, &docs)?;
        }
        Command::Analyze {
            base,
            model,
            refs,
            labels,
            bins,
            out,
            heatmap_threshold,
            heatmap_docs,
            heatmap_system,
        } => {
            let refs = read_documents(&cfg.resolve_path(&refs), &keywords)?;
            let labeled = index_docs(read_documents(&cfg.resolve_path(&labels), &keywords)?);
            let base = index_preds(read_records(&cfg.resolve_path(&base))?);
            let model = index_preds(read_records(&cfg.resolve_path(&model))?);
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

            let mut comparisons = Vec::with_capacity(refs.len());
            for doc in &refs {
                let lookup = |m: &HashMap<String, PredictionRecord>| {
                    m.get(&doc.id).cloned().ok_or_else(|| {
                        Error::DocMismatch("<missing prediction>".into(), doc.id.clone())
                    })
                };
                let b = ExtractionResult::from_record(lookup(&base)?, doc)?;
                let m = ExtractionResult::from_record(lookup(&model)?, doc)?;
                let oracle = labeled
                    .get(&doc.id)
                    .and_then(Document::oracle_labels)
                    .ok_or_else(|| Error::MissingLabels(doc.id.clone()))?;
                comparisons.push(compare(doc, &b, &m, &oracle)?);
                if heatmap_docs.is_empty() || heatmap_docs.contains(&doc.id) {
                    let shown = if heatmap_system == System::Base {
                        &b
                    } else {
                        &m
                    };
                    let rows = heatmap_export(
                        doc,
                        &shown.probs,
                        &shown.selected,
                        &oracle,
                        heatmap_threshold,
                    )?;
                    write_heatmap_csv(
                        &out.join(format!("heatmap_{}.csv", sanitize_id(&doc.id))),
                        &rows,
                    )?;
                }
            }
            write_comparisons_csv(&out.join("comparisons.csv"), &comparisons)?;
            let summary = bin_summary(&comparisons);
            write_bins_csv(&out.join("bins.csv"), &summary)?;
            write_length_bins_csv(
                &out.join("length_bins.csv"),
                &length_bins(&comparisons, bins)?,
            )?;
            for row in summary.rows() {
                println!(
                    "{:<9} {:>6} {:>+9.4} {:>+9.4}",
                    row.bin, row.count, row.mean_rg_diff, row.mean_f_diff
                );
            }
        }
        Command::Plot {
            input,
            kind,
            format,
            out,
        } => {
            let format: ImageFormat = format.parse()?;
            let input = cfg.resolve_path(&input);
            let title = input
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("")
                .to_string();
            match (kind, format) {
                (PlotKind::LengthBins, ImageFormat::Svg) => {
                    save_svg(&out, &bar_chart_svg(&length_bin_groups(&input)?, &title))?
                }
                (PlotKind::LengthBins, ImageFormat::Png) => {
                    save_png(&out, &bar_chart_png(&length_bin_groups(&input)?))?
                }
                (PlotKind::Heatmap, ImageFormat::Svg) => {
                    save_svg(&out, &heatmap_svg(&heatmap_rows(&input)?, &title))?
                }
                (PlotKind::Heatmap, ImageFormat::Png) => {
                    save_png(&out, &heatmap_png(&heatmap_rows(&input)?))?
                }
            }
        }
        Command::GenSynthetic {
            num_docs,
            sentences_per_doc,
            sections,
            seed,
            out,
        } => {
            let synth = SynthConfig::new(
                num_docs,
                sentences_per_doc,
                sections,
                seed.unwrap_or(cfg.seed),
            );
            write_jsonl(&out, &gen_synthetic(&synth)?)?;
        }
    }
    Ok(())
}

fn run_train(
    args: TrainArgs,
    mut cfg: RunConfig,
    keywords: &crate::corpus::SectionKeywordMap,
) -> Result<()> {
    set(&mut cfg.alpha, args.alpha);
    set(&mut cfg.seed, args.seed);
    set(&mut cfg.max_steps, args.max_steps);
    set(&mut cfg.val_interval, args.val_interval);
    set(&mut cfg.lr, args.lr);
    set(&mut cfg.batch_docs, args.batch_docs);
    set(&mut cfg.d, args.d);
    set(&mut cfg.n_context_layers, args.layers);
    set(&mut cfg.n_heads, args.heads);
    set(&mut cfg.dropout, args.dropout);
    set(&mut cfg.vocab_size, args.vocab_size);
    set(&mut cfg.max_sentences, args.max_sentences);
    if args.top_k.is_some() {
        cfg.top_k = args.top_k;
    }
    let model_cfg = cfg.model_config()?;
    let train_cfg = cfg.train_config()?;
    let train_docs = read_documents(&cfg.resolve_path(&args.train), keywords)?;
    let val_docs = read_documents(&cfg.resolve_path(&args.val), keywords)?;
    let report = train(&train_docs, &val_docs, &model_cfg, &train_cfg, &args.out)?;
    let best = select_best(&report.checkpoints)?;
    let best_path = args.out.join("best.json");
    std::fs::copy(&best.path, &best_path).map_err(|e| Error::io(&best_path, e))?;
    println!(
        "best checkpoint: step {} val_metric {:.6} -> {}",
        best.step,
        best.val_metric,
        best_path.display()
    );
    Ok(())
}

fn index_docs(docs: Vec<Document>) -> HashMap<String, Document> {
    docs.into_iter().map(|d| (d.id.clone(), d)).collect()
}

fn index_preds(preds: Vec<PredictionRecord>) -> HashMap<String, PredictionRecord> {
    preds.into_iter().map(|p| (p.id.clone(), p)).collect()
}

#[derive(serde::Serialize)]
struct EvalRow<'a> {
    doc_id: &'a str,
    rg1_p: f64,
    rg1_r: f64,
    rg1_f: f64,
    rg2_p: f64,
    rg2_r: f64,
    rg2_f: f64,
    rgl_p: f64,
    rgl_r: f64,
    rgl_f: f64,
}

/// Writes one CSV row per prediction and prints the mean F1s.
pub fn write_evaluation(
    out: &Path,
    preds: &[PredictionRecord],
    docs: &HashMap<String, Document>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(out).map_err(|e| csv_err(out, e))?;
    let mut sums = [0.0; 3];
    for p in preds {
        let doc = docs
            .get(&p.id)
            .ok_or_else(|| Error::DocMismatch(p.id.clone(), "<missing reference>".into()))?;
        let result = ExtractionResult::from_record(p.clone(), doc)?;
        let s = rouge_suite(&result.summary_tokens, &doc.summary_tokens);
        for (acc, f) in sums.iter_mut().zip(s.f1s()) {
            *acc += f;
        }
        w.serialize(EvalRow {
            doc_id: &p.id,
            rg1_p: s.rouge1.precision,
            rg1_r: s.rouge1.recall,
            rg1_f: s.rouge1.f1,
            rg2_p: s.rouge2.precision,
            rg2_r: s.rouge2.recall,
            rg2_f: s.rouge2.f1,
            rgl_p: s.rouge_l.precision,
            rgl_r: s.rouge_l.recall,
            rgl_f: s.rouge_l.f1,
        })
        .map_err(|e| csv_err(out, e))?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    let n = preds.len().max(1) as f64;
    println!(
        "docs {}  RG-1 {:.4}  RG-2 {:.4}  RG-L {:.4}",
        preds.len(),
        sums[0] / n,
        sums[1] / n,
        sums[2] / n
    );
    Ok(())
}
