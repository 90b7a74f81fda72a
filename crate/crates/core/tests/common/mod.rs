//! Shared helpers for the integration suites: independent oracles (kept
//! deliberately separate from the library's computation paths) and dataset
//! protocol runners.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use matrix_embed::corpus::{corpus_from_lines, Corpus};
use matrix_embed::eval::{StsData, StsPair, StsSplit};
use matrix_embed::manifold::MatrixEmbedding;
use matrix_embed::trainer::{train, TrainConfig, TrainOutput};

// ---------------------------------------------------------------------------
// oracles

/// Similarity as a literal double sum over column pairs.
pub fn oracle_sim(a: &[f64], r1: usize, b: &[f64], r2: usize, p: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..r1 {
        for j in 0..r2 {
            for row in 0..p {
                acc += a[row * r1 + i] * b[row * r2 + j];
            }
        }
    }
    acc / (r1 * r2) as f64
}

/// Squared distance as a literal double sum over column pairs.
pub fn oracle_dist2(u: &[f64], v: &[f64], p: usize, r: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..r {
        for l in 0..r {
            for row in 0..p {
                let d = u[row * r + k] - v[row * r + l];
                acc += d * d;
            }
        }
    }
    acc / (r * r) as f64
}

/// Hinge loss recomputed through the double-sum similarity.
/// `shape` is `(p, r1, r2)`.
pub fn oracle_loss(
    v: &[f64],
    u: &[f64],
    negs: &[Vec<f64>],
    d: &[f64],
    shape: (usize, usize, usize),
    m: f64,
) -> f64 {
    let (p, r1, r2) = shape;
    negs.iter()
        .map(|n| {
            (m - oracle_sim(v, r1, u, r1, p) - oracle_sim(u, r1, d, r2, p)
                + oracle_sim(v, r1, n, r1, p)
                + oracle_sim(n, r1, d, r2, p))
            .max(0.0)
        })
        .sum()
}

pub fn oracle_purity(pred: &[usize], gold: &[usize]) -> f64 {
    let mut clusters = pred.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    let mut hits = 0usize;
    for &k in &clusters {
        let members: Vec<usize> = pred
            .iter()
            .zip(gold)
            .filter(|&(&a, _)| a == k)
            .map(|(_, &g)| g)
            .collect();
        let mut classes = members.clone();
        classes.sort_unstable();
        classes.dedup();
        hits += classes
            .iter()
            .map(|&c| members.iter().filter(|&&g| g == c).count())
            .max()
            .unwrap_or(0);
    }
    hits as f64 / pred.len() as f64
}

pub fn oracle_mi(pred: &[usize], gold: &[usize]) -> f64 {
    let n = pred.len() as f64;
    let uniq = |v: &[usize]| {
        let mut u = v.to_vec();
        u.sort_unstable();
        u.dedup();
        u
    };
    let mut mi = 0.0;
    for &k in &uniq(pred) {
        for &c in &uniq(gold) {
            let joint = pred
                .iter()
                .zip(gold)
                .filter(|&(&a, &b)| a == k && b == c)
                .count() as f64
                / n;
            if joint == 0.0 {
                continue;
            }
            let pk = pred.iter().filter(|&&a| a == k).count() as f64 / n;
            let pc = gold.iter().filter(|&&b| b == c).count() as f64 / n;
            mi += joint * (joint / (pk * pc)).ln();
        }
    }
    mi
}

pub fn oracle_entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut uniq = labels.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    uniq.iter()
        .map(|&k| {
            let p = labels.iter().filter(|&&a| a == k).count() as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Adjusted Rand index by O(n^2) pair counting.
pub fn oracle_ari(pred: &[usize], gold: &[usize]) -> f64 {
    let n = pred.len();
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    let mut total = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let sp = pred[i] == pred[j];
            let sg = gold[i] == gold[j];
            total += 1.0;
            match (sp, sg) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                _ => {}
            }
        }
    }
    let expected = (a + b) * (a + c) / total;
    let max_index = 0.5 * ((a + b) + (a + c));
    if (max_index - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (a - expected) / (max_index - expected)
}

/// Per-class F1 from scratch, macro and micro.
pub fn oracle_f1(pred: &[usize], gold: &[usize]) -> (f64, f64) {
    let mut classes: Vec<usize> = pred.iter().chain(gold).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    let mut macro_sum = 0.0;
    for &cl in &classes {
        let tp = pred
            .iter()
            .zip(gold)
            .filter(|&(&p, &g)| p == cl && g == cl)
            .count() as f64;
        let fp = pred
            .iter()
            .zip(gold)
            .filter(|&(&p, &g)| p == cl && g != cl)
            .count() as f64;
        let fn_ = pred
            .iter()
            .zip(gold)
            .filter(|&(&p, &g)| p != cl && g == cl)
            .count() as f64;
        let f1 = if tp > 0.0 {
            2.0 * tp / (2.0 * tp + fp + fn_)
        } else {
            0.0
        };
        macro_sum += f1;
    }
    let correct = pred.iter().zip(gold).filter(|&(&p, &g)| p == g).count() as f64;
    (
        macro_sum / classes.len() as f64,
        correct / gold.len() as f64,
    )
}

/// Textbook single-pass Pearson formula.
pub fn oracle_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

// ---------------------------------------------------------------------------
// random fixtures

pub fn random_unit(rng: &mut ChaCha8Rng, p: usize, r: usize) -> MatrixEmbedding<f64> {
    let data: Vec<f64> = (0..p * r).map(|_| rng.random_range(-1.0..1.0)).collect();
    MatrixEmbedding::normalized(data, p, r).unwrap()
}

// ---------------------------------------------------------------------------
// datasets for the quantitative criteria

/// Root of the evaluation datasets: `$MATRIX_EMBED_DATA` or `<repo>/data`.
pub fn data_root() -> PathBuf {
    std::env::var_os("MATRIX_EMBED_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// Panics with fetch instructions when a dataset is absent.
pub fn require_dataset(sub: &str, files: &[&str]) -> PathBuf {
    let dir = data_root().join(sub);
    for f in files {
        let path = dir.join(f);
        assert!(
            path.is_file(),
            "dataset file {} not found.\nFetch and prepare the evaluation datasets first \
             (see README, \"Reproducing the benchmark numbers\"), or point MATRIX_EMBED_DATA \
             at a directory containing {sub}/{f}.",
            path.display()
        );
    }
    dir
}

pub fn acceptance_threads() -> usize {
    std::env::var("MATRIX_EMBED_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(2)
        })
}

pub fn read_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
        .lines()
        .map(|l| l.to_string())
        .collect()
}

pub fn dense_labels(raw: &[String]) -> Vec<usize> {
    let mut seen: Vec<&str> = Vec::new();
    raw.iter()
        .map(|l| match seen.iter().position(|&s| s == l.as_str()) {
            Some(i) => i,
            None => {
                seen.push(l);
                seen.len() - 1
            }
        })
        .collect()
}

/// Protocol defaults shared by the quantitative criteria.
pub fn protocol_config(r1: usize, r2: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        word_cols: r1,
        doc_cols: r2,
        seed,
        threads: acceptance_threads(),
        ..TrainConfig::default()
    }
}

pub fn train_corpus_docs(corpus: &Corpus, config: &TrainConfig) -> Vec<MatrixEmbedding<f64>> {
    let out: TrainOutput<f64> = train(corpus, config).expect("training failed");
    out.params
        .docs
        .to_matrices()
        .expect("doc bank export failed")
}

/// Trains document embeddings over the concatenated 20NG train+test corpora.
/// Returns (docs, dense labels, number of training documents).
pub fn train_20ng(
    dir: &Path,
    r1: usize,
    r2: usize,
    seed: u64,
) -> (Vec<MatrixEmbedding<f64>>, Vec<usize>, usize) {
    let mut lines = read_lines(&dir.join("train.txt"));
    let n_train = lines.len();
    lines.extend(read_lines(&dir.join("test.txt")));
    let mut labels = read_lines(&dir.join("train.labels"));
    labels.extend(read_lines(&dir.join("test.labels")));
    assert_eq!(lines.len(), labels.len(), "20ng corpus/label misalignment");

    let config = protocol_config(r1, r2, seed);
    let corpus = corpus_from_lines(lines.iter().map(|s| s.as_str()), config.min_count)
        .expect("20ng corpus load failed");
    let docs = train_corpus_docs(&corpus, &config);
    (docs, dense_labels(&labels), n_train)
}

/// Trains document embeddings over the movie-review polarity corpus.
pub fn train_polarity(
    dir: &Path,
    r1: usize,
    r2: usize,
    seed: u64,
) -> (Vec<MatrixEmbedding<f64>>, Vec<usize>) {
    let lines = read_lines(&dir.join("reviews.txt"));
    let labels = read_lines(&dir.join("reviews.labels"));
    assert_eq!(
        lines.len(),
        labels.len(),
        "polarity corpus/label misalignment"
    );
    let config = protocol_config(r1, r2, seed);
    let corpus = corpus_from_lines(lines.iter().map(|s| s.as_str()), config.min_count)
        .expect("polarity corpus load failed");
    (train_corpus_docs(&corpus, &config), dense_labels(&labels))
}

/// Runs the full STS protocol for one (r1, r2, seed) cell: all splits'
/// sentences become training documents, then dev/test Pearson are computed.
pub fn run_sts_cell(dir: &Path, r1: usize, r2: usize, seed: u64) -> (f64, f64) {
    let mut data = StsData::default();
    data.load_file(&dir.join("sts-train.csv"), StsSplit::Train)
        .expect("sts train load");
    data.load_file(&dir.join("sts-dev.csv"), StsSplit::Dev)
        .expect("sts dev load");
    data.load_file(&dir.join("sts-test.csv"), StsSplit::Test)
        .expect("sts test load");

    let config = TrainConfig {
        iterations: 1000,
        window: 15,
        negatives: 5,
        ..protocol_config(r1, r2, seed)
    };
    let corpus = corpus_from_lines(data.sentences.iter().map(|s| s.as_str()), config.min_count)
        .expect("sts corpus load");
    let docs = train_corpus_docs(&corpus, &config);
    matrix_embed::eval::sts_evaluate(&docs, &data.pairs).expect("sts evaluation failed")
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Seeded 80/20-style index split used by the movie-review protocol.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let cut = ((n as f64) * fraction).round() as usize;
    (idx[..cut].to_vec(), idx[cut..].to_vec())
}

/// Convenience for building StsPair lists in synthetic tests.
pub fn pair(a: u32, b: u32, gold: f64, split: StsSplit) -> StsPair {
    StsPair {
        sentence_a: a,
        sentence_b: b,
        gold,
        split,
    }
}
