mod prep;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use matrix_embed::corpus::{corpus_from_lines, load_corpus, Corpus};
use matrix_embed::eval::{
    adjusted_rand_index, f1_scores, knn_classify, mutual_info, nmi, purity, spectral_cluster,
    stratified_subsample, sts_evaluate, ContingencyTable, NmiNorm, SpectralOptions, StsData,
    StsSplit,
};
use matrix_embed::io::{
    read_embeddings, sha256_file, write_embeddings_binary, write_embeddings_text, write_manifest,
    RunManifest,
};
use matrix_embed::manifold::MatrixEmbedding;
use matrix_embed::trainer::{train, TrainConfig, TrainOutput};

#[derive(Parser)]
#[command(
    name = "matrix-embed",
    version,
    about = "Train and evaluate word/document embeddings represented as unit-Frobenius-norm matrices."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train embeddings on a one-document-per-line corpus and write one
    /// embedding file per bank.
    Train(TrainArgs),
    /// Spectral-cluster document embeddings against gold labels and report
    /// MI, NMI, ARI, and purity.
    Cluster(ClusterArgs),
    /// Classify documents with k-NN under the matrix distance and report
    /// macro/micro F1.
    Classify(ClassifyArgs),
    /// Train on the STS benchmark sentences and report dev/test Pearson.
    Sts(StsArgs),
    /// Convert a raw 20 Newsgroups distribution (bydate layout) into
    /// one-document-per-line corpus and label files.
    #[command(name = "prep-20ng")]
    Prep20ng(prep::PrepArgs),
    /// Convert the sentence-polarity movie review distribution into
    /// one-document-per-line corpus and label files.
    #[command(name = "prep-polarity")]
    PrepPolarity(prep::PrepArgs),
}

/// Training hyperparameters shared by `train` and `sts`. Unset flags fall
/// back to the subcommand's protocol defaults.
#[derive(Args, Clone)]
struct HyperArgs {
    /// Embedding row dimension p.
    #[arg(long)]
    size: Option<usize>,
    /// Word matrix columns r1.
    #[arg(long)]
    word_cols: Option<usize>,
    /// Document matrix columns r2 (r1 <= r2 <= p).
    #[arg(long)]
    doc_cols: Option<usize>,
    /// Maximum context window.
    #[arg(long)]
    window: Option<usize>,
    /// Negative samples per pair.
    #[arg(long)]
    negative: Option<usize>,
    /// Full passes over the corpus.
    #[arg(long)]
    iter: Option<usize>,
    /// Hinge margin m.
    #[arg(long)]
    margin: Option<f64>,
    /// Initial learning rate.
    #[arg(long)]
    alpha: Option<f64>,
    /// Minimum token frequency.
    #[arg(long)]
    min_count: Option<u64>,
    /// Frequent-word subsampling threshold.
    #[arg(long)]
    sample: Option<f64>,
    /// Hogwild worker threads (1 = bit-deterministic).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Average the hinge over negatives instead of summing.
    #[arg(long)]
    average_negatives: bool,
}

impl HyperArgs {
    fn resolve(&self, mut base: TrainConfig) -> TrainConfig {
        if let Some(v) = self.size {
            base.dim = v;
        }
        if let Some(v) = self.word_cols {
            base.word_cols = v;
        }
        if let Some(v) = self.doc_cols {
            base.doc_cols = v;
        }
        if let Some(v) = self.window {
            base.window = v;
        }
        if let Some(v) = self.negative {
            base.negatives = v;
        }
        if let Some(v) = self.iter {
            base.iterations = v;
        }
        if let Some(v) = self.margin {
            base.margin = v;
        }
        if let Some(v) = self.alpha {
            base.alpha = v;
        }
        if let Some(v) = self.min_count {
            base.min_count = v;
        }
        if let Some(v) = self.sample {
            base.subsample = v;
        }
        if let Some(v) = self.threads {
            base.threads = v;
        }
        if let Some(v) = self.seed {
            base.seed = v;
        }
        base.average_negatives |= self.average_negatives;
        base
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus, UTF-8 text, one document per line.
    #[arg(long)]
    train: PathBuf,
    /// Output file for word (center-bank) embeddings.
    #[arg(long)]
    word_out: PathBuf,
    /// Output file for document embeddings.
    #[arg(long)]
    doc_out: PathBuf,
    /// Also write the context-word bank here.
    #[arg(long)]
    context_out: Option<PathBuf>,
    /// 1 writes little-endian f32 binary files, 0 writes text.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    binary: u8,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct ClusterArgs {
    /// Document embedding file.
    #[arg(long)]
    docs: PathBuf,
    /// Gold labels, one per line, aligned with the embedding file.
    #[arg(long)]
    labels: PathBuf,
    /// Cluster count.
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Affinity kernel coefficient.
    #[arg(long, default_value_t = 0.001)]
    gamma: f64,
    /// Stratified subsample size before clustering.
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// NMI normalization: arithmetic or geometric mean of entropies.
    #[arg(long, default_value = "arithmetic")]
    nmi_norm: String,
    /// Write metrics as JSON here as well.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Training document embedding file (file mode).
    #[arg(long)]
    train_docs: Option<PathBuf>,
    /// Training labels, one per line.
    #[arg(long)]
    train_labels: Option<PathBuf>,
    /// Test document embedding file (file mode).
    #[arg(long)]
    test_docs: Option<PathBuf>,
    /// Test labels, one per line.
    #[arg(long)]
    test_labels: Option<PathBuf>,
    /// Single embedding file, split into train/test by --split (split mode).
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Labels for --docs or --corpus.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Raw training corpus (pipeline mode: embeddings are trained first,
    /// then classified against --test-corpus under the original split).
    #[arg(long)]
    train_corpus: Option<PathBuf>,
    /// Raw test corpus for pipeline mode.
    #[arg(long)]
    test_corpus: Option<PathBuf>,
    /// Single raw corpus, embeddings trained then split by --split
    /// (pipeline split mode).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Training fraction for the split modes.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// Seed for the split-mode shuffle.
    #[arg(long, default_value_t = 1)]
    split_seed: u64,
    /// Neighbor count.
    #[arg(long, default_value_t = 3)]
    knn: usize,
    /// In pipeline modes, sweep r1 in 1..=4, r2 in r1..=4.
    #[arg(long)]
    sweep: bool,
    /// Write metrics as JSON here as well.
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct StsArgs {
    /// Directory holding sts-train.csv, sts-dev.csv, sts-test.csv.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    train_file: Option<PathBuf>,
    #[arg(long)]
    dev_file: Option<PathBuf>,
    #[arg(long)]
    test_file: Option<PathBuf>,
    /// Sweep r1 in 1..=4, r2 in r1..=4 instead of a single cell.
    #[arg(long)]
    sweep: bool,
    /// Optionally save the trained document bank (single-cell runs).
    #[arg(long)]
    doc_out: Option<PathBuf>,
    /// Write metrics as JSON here as well.
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Train(args) => cmd_train(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Sts(args) => cmd_sts(args),
        Command::Prep20ng(args) => prep::prep_20ng(&args),
        Command::PrepPolarity(args) => prep::prep_polarity(&args),
    }
}

struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    fn new() -> Self {
        Report { lines: Vec::new() }
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        println!("{key}={value}");
        self.lines.push((key.to_string(), value));
    }

    fn write_summary(&self, path: &Option<PathBuf>) -> Result<()> {
        if let Some(path) = path {
            let map: BTreeMap<&str, &str> = self
                .lines
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str()))
                .collect();
            std::fs::write(path, serde_json::to_string_pretty(&map)?)
                .with_context(|| format!("writing summary {}", path.display()))?;
        }
        Ok(())
    }
}

fn read_labels(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(
        File::open(path).with_context(|| format!("opening labels {}", path.display()))?,
    );
    let mut out = Vec::new();
    for line in reader.lines() {
        out.push(line?.trim().to_string());
    }
    while out.last().is_some_and(|l| l.is_empty()) {
        out.pop();
    }
    Ok(out)
}

fn dense_labels(labels: &[String]) -> Vec<usize> {
    let mut seen: Vec<&str> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|&s| s == l.as_str()) {
            Some(i) => i,
            None => {
                seen.push(l);
                seen.len() - 1
            }
        })
        .collect()
}

fn load_aligned_bank(
    docs: &Path,
    labels: &Path,
) -> Result<(Vec<MatrixEmbedding<f64>>, Vec<usize>)> {
    let (_, bank) =
        read_embeddings::<f64>(docs).with_context(|| format!("reading {}", docs.display()))?;
    let raw = read_labels(labels)?;
    if raw.len() != bank.len() {
        bail!(
            "label count {} does not match embedding count {} ({} vs {})",
            raw.len(),
            bank.len(),
            labels.display(),
            docs.display()
        );
    }
    Ok((bank, dense_labels(&raw)))
}

fn run_training(corpus: &Corpus, config: &TrainConfig) -> Result<TrainOutput<f64>> {
    config.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    log::info!(
        "training: {} docs, vocab {}, {} tokens, p={} r1={} r2={} iter={} threads={}",
        corpus.docs.len(),
        corpus.vocab.len(),
        corpus.vocab.total_tokens(),
        config.dim,
        config.word_cols,
        config.doc_cols,
        config.iterations,
        config.threads
    );
    Ok(train::<f64>(corpus, config)?)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let config = args.hyper.resolve(TrainConfig::default());
    let started = Instant::now();
    let corpus = load_corpus(&args.train, config.min_count)
        .with_context(|| format!("loading corpus {}", args.train.display()))?;
    let out = run_training(&corpus, &config)?;

    let word_labels: Vec<String> = corpus.vocab.tokens().to_vec();
    let doc_labels: Vec<String> = (0..corpus.docs.len()).map(|i| i.to_string()).collect();
    let words = out.params.center_words.to_matrices()?;
    let docs = out.params.docs.to_matrices()?;

    let mut outputs = vec![
        args.word_out.display().to_string(),
        args.doc_out.display().to_string(),
    ];
    if args.binary == 1 {
        write_embeddings_binary(&args.word_out, &word_labels, &words)?;
        write_embeddings_binary(&args.doc_out, &doc_labels, &docs)?;
    } else {
        write_embeddings_text(&args.word_out, &word_labels, &words)?;
        write_embeddings_text(&args.doc_out, &doc_labels, &docs)?;
    }
    if let Some(ctx_path) = &args.context_out {
        let ctx = out.params.context_words.to_matrices()?;
        if args.binary == 1 {
            write_embeddings_binary(ctx_path, &word_labels, &ctx)?;
        } else {
            write_embeddings_text(ctx_path, &word_labels, &ctx)?;
        }
        outputs.push(ctx_path.display().to_string());
    }

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        corpus_path: args.train.display().to_string(),
        corpus_sha256: sha256_file(&args.train)?,
        vocab_size: corpus.vocab.len(),
        n_docs: corpus.docs.len(),
        total_tokens: corpus.vocab.total_tokens(),
        wall_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    let manifest_path = args.word_out.with_extension(format!(
        "{}manifest.json",
        args.word_out
            .extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    write_manifest(&manifest_path, &manifest)?;

    let mut report = Report::new();
    report.push("vocab", corpus.vocab.len());
    report.push("docs", corpus.docs.len());
    report.push(
        "final_epoch_loss",
        format!("{:.6}", out.epoch_mean_loss.last().copied().unwrap_or(0.0)),
    );
    report.push("max_norm_drift", format!("{:.3e}", out.max_norm_drift));
    report.push("manifest", manifest_path.display());
    report.push("wall_seconds", format!("{:.1}", manifest.wall_seconds));
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<()> {
    let (mut bank, mut gold) = load_aligned_bank(&args.docs, &args.labels)?;
    if let Some(m) = args.subsample {
        let keep = stratified_subsample(&gold, m, args.seed)?;
        bank = keep.iter().map(|&i| bank[i].clone()).collect();
        gold = keep.iter().map(|&i| gold[i]).collect();
    }
    let norm = match args.nmi_norm.as_str() {
        "arithmetic" => NmiNorm::Arithmetic,
        "geometric" => NmiNorm::Geometric,
        other => bail!("--nmi-norm must be arithmetic or geometric, got {other:?}"),
    };
    let opts = SpectralOptions {
        gamma: args.gamma,
        seed: args.seed,
        ..SpectralOptions::default()
    };
    let predicted = spectral_cluster(&bank, args.k, &opts)?;
    let table = ContingencyTable::from_labels(&predicted, &gold)?;

    let mut report = Report::new();
    report.push("docs", bank.len());
    report.push("k", args.k);
    report.push("gamma", args.gamma);
    report.push("seed", args.seed);
    report.push("mi", format!("{:.6}", mutual_info(&table)));
    report.push("nmi", format!("{:.6}", nmi(&table, norm)));
    report.push("ari", format!("{:.6}", adjusted_rand_index(&table)));
    report.push("purity", format!("{:.6}", purity(&table)));
    report.write_summary(&args.summary_out)
}

/// How the train/test document banks are obtained for classification.
enum ClassifySource {
    /// Precomputed embedding files with an explicit train/test split.
    Files,
    /// One precomputed embedding file, split by seeded shuffle.
    FileSplit,
    /// Raw corpora: train embeddings first, keep the original split.
    Pipeline,
    /// One raw corpus: train embeddings, then split by seeded shuffle.
    PipelineSplit,
}

fn classify_source(args: &ClassifyArgs) -> Result<ClassifySource> {
    let file_mode = args.train_docs.is_some() || args.test_docs.is_some();
    let split_file = args.docs.is_some();
    let pipeline = args.train_corpus.is_some() || args.test_corpus.is_some();
    let pipeline_split = args.corpus.is_some();
    match (file_mode, split_file, pipeline, pipeline_split) {
        (true, false, false, false) => Ok(ClassifySource::Files),
        (false, true, false, false) => Ok(ClassifySource::FileSplit),
        (false, false, true, false) => Ok(ClassifySource::Pipeline),
        (false, false, false, true) => Ok(ClassifySource::PipelineSplit),
        _ => bail!(
            "classify needs exactly one input style: embedding files \
             (--train-docs/--test-docs), one embedding file with --docs/--split, \
             raw corpora (--train-corpus/--test-corpus), or one raw corpus (--corpus/--split)"
        ),
    }
}

struct ClassifyInstance {
    train_bank: Vec<MatrixEmbedding<f64>>,
    train_gold: Vec<usize>,
    test_bank: Vec<MatrixEmbedding<f64>>,
    test_gold: Vec<usize>,
}

fn split_bank(
    bank: Vec<MatrixEmbedding<f64>>,
    gold: Vec<usize>,
    fraction: f64,
    seed: u64,
) -> Result<ClassifyInstance> {
    if !(0.0 < fraction && fraction < 1.0) {
        bail!("--split must be in (0, 1), got {fraction}");
    }
    let (train_idx, test_idx) = split_indices(bank.len(), fraction, seed);
    Ok(ClassifyInstance {
        train_bank: train_idx.iter().map(|&i| bank[i].clone()).collect(),
        train_gold: train_idx.iter().map(|&i| gold[i]).collect(),
        test_bank: test_idx.iter().map(|&i| bank[i].clone()).collect(),
        test_gold: test_idx.iter().map(|&i| gold[i]).collect(),
    })
}

fn classify_report(
    report: &mut Report,
    prefix: &str,
    args: &ClassifyArgs,
    inst: &ClassifyInstance,
) -> Result<()> {
    let predicted = knn_classify(
        &inst.train_bank,
        &inst.train_gold,
        &inst.test_bank,
        args.knn,
    )?;
    let (macro_f1, micro_f1) = f1_scores(&predicted, &inst.test_gold)?;
    report.push(&format!("{prefix}f1_macro"), format!("{macro_f1:.6}"));
    report.push(&format!("{prefix}f1_micro"), format!("{micro_f1:.6}"));
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    let source = classify_source(&args)?;
    let mut report = Report::new();
    report.push("knn", args.knn);

    match source {
        ClassifySource::Files => {
            let (Some(td), Some(tl), Some(qd), Some(ql)) = (
                &args.train_docs,
                &args.train_labels,
                &args.test_docs,
                &args.test_labels,
            ) else {
                bail!("file mode requires all four of --train-docs --train-labels --test-docs --test-labels");
            };
            // dense label ids must share one space across both files
            let (_, train_bank) = read_embeddings::<f64>(td)?;
            let (_, test_bank) = read_embeddings::<f64>(qd)?;
            let train_raw = read_labels(tl)?;
            let test_raw = read_labels(ql)?;
            if train_raw.len() != train_bank.len() || test_raw.len() != test_bank.len() {
                bail!("label counts do not match embedding counts");
            }
            let mut all = train_raw.clone();
            all.extend(test_raw.iter().cloned());
            let dense = dense_labels(&all);
            let inst = ClassifyInstance {
                train_gold: dense[..train_raw.len()].to_vec(),
                test_gold: dense[train_raw.len()..].to_vec(),
                train_bank,
                test_bank,
            };
            report.push("train_size", inst.train_bank.len());
            report.push("test_size", inst.test_bank.len());
            classify_report(&mut report, "", &args, &inst)?;
        }
        ClassifySource::FileSplit => {
            let (Some(docs), Some(labels)) = (&args.docs, &args.labels) else {
                bail!("split mode requires both --docs and --labels");
            };
            let (bank, gold) = load_aligned_bank(docs, labels)?;
            let inst = split_bank(bank, gold, args.split, args.split_seed)?;
            report.push("train_size", inst.train_bank.len());
            report.push("test_size", inst.test_bank.len());
            classify_report(&mut report, "", &args, &inst)?;
        }
        ClassifySource::Pipeline | ClassifySource::PipelineSplit => {
            classify_pipeline(source, &args, &mut report)?;
        }
    }
    report.write_summary(&args.summary_out)
}

/// Trains embeddings from raw corpora and classifies the document bank;
/// with --sweep, repeats per (r1, r2) grid cell.
fn classify_pipeline(
    source: ClassifySource,
    args: &ClassifyArgs,
    report: &mut Report,
) -> Result<()> {
    let config = args.hyper.resolve(TrainConfig::default());

    // assemble (lines, gold labels, train count)
    let (lines, gold, n_train) = match source {
        ClassifySource::Pipeline => {
            let (Some(tc), Some(tl), Some(qc), Some(ql)) = (
                &args.train_corpus,
                &args.train_labels,
                &args.test_corpus,
                &args.test_labels,
            ) else {
                bail!("pipeline mode requires --train-corpus --train-labels --test-corpus --test-labels");
            };
            let mut lines = read_corpus_lines(tc)?;
            let n_train = lines.len();
            lines.extend(read_corpus_lines(qc)?);
            let mut raw = read_labels(tl)?;
            let n_train_labels = raw.len();
            raw.extend(read_labels(ql)?);
            if n_train != n_train_labels || lines.len() != raw.len() {
                bail!("corpus/label line counts do not match");
            }
            (lines, dense_labels(&raw), n_train)
        }
        _ => {
            let (Some(corpus), Some(labels)) = (&args.corpus, &args.labels) else {
                bail!("pipeline split mode requires --corpus and --labels");
            };
            let lines = read_corpus_lines(corpus)?;
            let raw = read_labels(labels)?;
            if lines.len() != raw.len() {
                bail!("corpus/label line counts do not match");
            }
            (lines, dense_labels(&raw), 0)
        }
    };
    let corpus = corpus_from_lines(lines.iter().map(|s| s.as_str()), config.min_count)?;

    let run_cell = |r1: usize, r2: usize, prefix: &str, report: &mut Report| -> Result<()> {
        let cell = TrainConfig {
            word_cols: r1,
            doc_cols: r2,
            ..config.clone()
        };
        let out = run_training(&corpus, &cell)?;
        let bank = out.params.docs.to_matrices()?;
        let inst = if n_train > 0 {
            ClassifyInstance {
                train_bank: bank[..n_train].to_vec(),
                train_gold: gold[..n_train].to_vec(),
                test_bank: bank[n_train..].to_vec(),
                test_gold: gold[n_train..].to_vec(),
            }
        } else {
            split_bank(bank, gold.clone(), args.split, args.split_seed)?
        };
        classify_report(report, prefix, args, &inst)
    };

    if args.sweep {
        for r1 in 1..=4usize {
            for r2 in r1..=4usize {
                run_cell(r1, r2, &format!("cell_r1_{r1}_r2_{r2}_"), report)?;
            }
        }
    } else {
        run_cell(config.word_cols, config.doc_cols, "", report)?;
    }
    Ok(())
}

fn read_corpus_lines(path: &Path) -> Result<Vec<String>> {
    Ok(std::fs::read_to_string(path)
        .with_context(|| format!("reading corpus {}", path.display()))?
        .lines()
        .map(|l| l.to_string())
        .collect())
}

/// Seeded shuffle of 0..n split at `fraction`.
fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let cut = ((n as f64) * fraction).round() as usize;
    let cut = cut.clamp(1, n.saturating_sub(1).max(1));
    (idx[..cut].to_vec(), idx[cut..].to_vec())
}

fn sts_paths(args: &StsArgs) -> Result<(PathBuf, PathBuf, PathBuf)> {
    if let Some(dir) = &args.data_dir {
        return Ok((
            dir.join("sts-train.csv"),
            dir.join("sts-dev.csv"),
            dir.join("sts-test.csv"),
        ));
    }
    match (&args.train_file, &args.dev_file, &args.test_file) {
        (Some(a), Some(b), Some(c)) => Ok((a.clone(), b.clone(), c.clone())),
        _ => bail!("sts needs --data-dir or all of --train-file --dev-file --test-file"),
    }
}

fn cmd_sts(args: StsArgs) -> Result<()> {
    // protocol defaults for this benchmark: long training, wide windows,
    // more negatives
    let base = TrainConfig {
        iterations: 1000,
        window: 15,
        negatives: 5,
        ..TrainConfig::default()
    };
    let config = args.hyper.resolve(base);

    let (train_path, dev_path, test_path) = sts_paths(&args)?;
    let mut data = StsData::default();
    data.load_file(&train_path, StsSplit::Train)
        .with_context(|| format!("loading {}", train_path.display()))?;
    data.load_file(&dev_path, StsSplit::Dev)
        .with_context(|| format!("loading {}", dev_path.display()))?;
    data.load_file(&test_path, StsSplit::Test)
        .with_context(|| format!("loading {}", test_path.display()))?;
    if data.skipped > 0 {
        log::warn!("skipped {} malformed benchmark rows", data.skipped);
    }

    // every sentence occurrence is its own training document
    let corpus = corpus_from_lines(data.sentences.iter().map(|s| s.as_str()), config.min_count)?;

    let mut report = Report::new();
    report.push("pairs", data.pairs.len());
    report.push("skipped_rows", data.skipped);
    report.push("sentences", data.sentences.len());

    if args.sweep {
        let mut best = (0.0f64, 0usize, 0usize);
        for r1 in 1..=4usize {
            for r2 in r1..=4usize {
                let cell = TrainConfig {
                    word_cols: r1,
                    doc_cols: r2,
                    ..config.clone()
                };
                let out = run_training(&corpus, &cell)?;
                let docs = out.params.docs.to_matrices()?;
                let (dev, test) = sts_evaluate(&docs, &data.pairs)?;
                report.push(&format!("cell_r1_{r1}_r2_{r2}_dev"), format!("{dev:.6}"));
                report.push(&format!("cell_r1_{r1}_r2_{r2}_test"), format!("{test:.6}"));
                if dev > best.0 {
                    best = (dev, r1, r2);
                }
            }
        }
        report.push("best_dev_r1", best.1);
        report.push("best_dev_r2", best.2);
        report.push("best_dev", format!("{:.6}", best.0));
    } else {
        let out = run_training(&corpus, &config)?;
        let docs = out.params.docs.to_matrices()?;
        let (dev, test) = sts_evaluate(&docs, &data.pairs)?;
        if let Some(path) = &args.doc_out {
            let labels: Vec<String> = (0..docs.len()).map(|i| i.to_string()).collect();
            write_embeddings_text(path, &labels, &docs)?;
        }
        report.push("dev_pearson", format!("{dev:.6}"));
        report.push("test_pearson", format!("{test:.6}"));
    }
    report.write_summary(&args.summary_out)
}
