//! Joint training of word and document matrices on the unit sphere.
//!
//! For every positive tuple (context word V in the window of center word U
//! inside document D) and each sampled negative center N, the loss is the
//! hinge
//!
//! ```text
//! max(0, m - sim(V, U) - sim(U, D) + sim(V, N) + sim(N, D))
//! ```
//!
//! summed over negatives. Euclidean gradients of the hinge factor through
//! column sums; updates flatten each parameter, project the gradient onto
//! the sphere's tangent space, step against it, and renormalize.
//!
//! Training runs hogwild-style: workers own disjoint document shards and
//! update the shared parameter banks without locks. Single-threaded runs are
//! bit-deterministic for a fixed seed.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{iter_windows, subsample_keep, Corpus, NegativeTable};
use crate::error::{Error, Result};
use crate::manifold::{descend_in_place, frobenius_norm, MatrixEmbedding};
use crate::scalar::{Scalar, ScalarCell};
use crate::similarity::{broadcast_column, column_sum_into, sim_from_colsums};

/// All training hyperparameters. The defaults reproduce the reference
/// protocol: 35 iterations, window 5, dimension 100, 2 negatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Row dimension p of every embedding matrix.
    pub dim: usize,
    /// Columns r1 of word matrices.
    pub word_cols: usize,
    /// Columns r2 of document matrices (r1 <= r2 <= p).
    pub doc_cols: usize,
    /// Hinge margin m > 0.
    pub margin: f64,
    /// Initial learning rate; decays linearly to `alpha * 1e-4`.
    pub alpha: f64,
    /// Full passes over the corpus.
    pub iterations: usize,
    /// Maximum context window; the effective window is drawn uniformly from
    /// `1..=window` per center.
    pub window: usize,
    /// Negative samples per (center, context) pair.
    pub negatives: usize,
    /// Tokens with corpus frequency below this never enter the vocabulary.
    pub min_count: u64,
    /// Frequent-word subsampling threshold t.
    pub subsample: f64,
    /// Hogwild workers. 1 means sequential and bit-deterministic.
    pub threads: usize,
    pub seed: u64,
    /// Average the hinge over negatives instead of summing it.
    pub average_negatives: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            word_cols: 1,
            doc_cols: 1,
            margin: 0.15,
            alpha: 0.025,
            iterations: 35,
            window: 5,
            negatives: 2,
            min_count: 5,
            subsample: 1e-3,
            threads: 1,
            seed: 1,
            average_negatives: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.word_cols < 1 || self.doc_cols < 1 || self.dim < 1 {
            return Err(Error::InvalidConfig("dimensions must be at least 1".into()));
        }
        if self.word_cols > self.doc_cols {
            return Err(Error::InvalidConfig(format!(
                "word matrices cannot have more columns than document matrices (r1 <= r2): \
                 got r1={}, r2={}",
                self.word_cols, self.doc_cols
            )));
        }
        if self.doc_cols > self.dim {
            return Err(Error::InvalidConfig(format!(
                "column count cannot exceed the row dimension (r <= p): got r2={}, p={}",
                self.doc_cols, self.dim
            )));
        }
        if !(self.margin > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.alpha
            )));
        }
        if self.iterations < 1 || self.window < 1 || self.negatives < 1 || self.threads < 1 {
            return Err(Error::InvalidConfig(
                "iterations, window, negatives, and threads must be positive".into(),
            ));
        }
        if !(self.subsample > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "subsampling threshold must be positive, got {}",
                self.subsample
            )));
        }
        Ok(())
    }
}

/// A bank of `rows` unit-norm `p x r` matrices in one flat, lock-free buffer.
pub struct ParamBank<T: Scalar> {
    cells: Vec<T::Cell>,
    rows: usize,
    p: usize,
    r: usize,
}

impl<T: Scalar> ParamBank<T> {
    fn init<R: Rng>(rows: usize, p: usize, r: usize, rng: &mut R) -> Self {
        let span = 0.5 / p as f64;
        let mut cells = Vec::with_capacity(rows * p * r);
        let mut entry = vec![T::zero(); p * r];
        for _ in 0..rows {
            loop {
                for x in entry.iter_mut() {
                    *x = T::c(rng.random_range(-span..span));
                }
                let norm = frobenius_norm(&entry);
                if norm > T::zero() && norm.is_finite() {
                    let inv = T::one() / norm;
                    cells.extend(entry.iter().map(|&x| T::Cell::new(x * inv)));
                    break;
                }
                // zero draw has probability zero; redraw
            }
        }
        ParamBank { cells, rows, p, r }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn cols(&self) -> usize {
        self.r
    }

    pub fn entry_len(&self) -> usize {
        self.p * self.r
    }

    pub fn read_into(&self, idx: usize, out: &mut [T]) {
        let len = self.entry_len();
        debug_assert_eq!(out.len(), len);
        let base = idx * len;
        for (o, c) in out.iter_mut().zip(&self.cells[base..base + len]) {
            *o = c.load();
        }
    }

    pub(crate) fn write(&self, idx: usize, vals: &[T]) {
        let len = self.entry_len();
        debug_assert_eq!(vals.len(), len);
        let base = idx * len;
        for (&v, c) in vals.iter().zip(&self.cells[base..base + len]) {
            c.store(v);
        }
    }

    /// Snapshot of one entry as a checked unit-norm matrix (renormalized to
    /// absorb any in-flight drift).
    pub fn matrix(&self, idx: usize) -> Result<MatrixEmbedding<T>> {
        let mut buf = vec![T::zero(); self.entry_len()];
        self.read_into(idx, &mut buf);
        MatrixEmbedding::normalized(buf, self.p, self.r)
    }

    pub fn to_matrices(&self) -> Result<Vec<MatrixEmbedding<T>>> {
        (0..self.rows).map(|i| self.matrix(i)).collect()
    }

    /// Rescales every entry to exact unit norm, returning the largest
    /// deviation `|norm - 1|` observed beforehand.
    pub fn renormalize(&self) -> f64 {
        let len = self.entry_len();
        let mut buf = vec![T::zero(); len];
        let mut worst = 0.0f64;
        for idx in 0..self.rows {
            self.read_into(idx, &mut buf);
            let norm = frobenius_norm(&buf);
            let dev = (norm - T::one()).abs().to_f64().unwrap_or(f64::INFINITY);
            worst = worst.max(dev);
            if dev > 0.0 && norm > T::zero() && norm.is_finite() {
                let inv = T::one() / norm;
                for x in buf.iter_mut() {
                    *x = *x * inv;
                }
                self.write(idx, &buf);
            }
        }
        worst
    }
}

/// The three parameter banks: center words (role U, the exported word
/// embeddings), context words (role V), and documents (role D).
pub struct ModelParams<T: Scalar> {
    pub center_words: ParamBank<T>,
    pub context_words: ParamBank<T>,
    pub docs: ParamBank<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn dim(&self) -> usize {
        self.center_words.dim()
    }

    pub fn word_cols(&self) -> usize {
        self.center_words.cols()
    }

    pub fn doc_cols(&self) -> usize {
        self.docs.cols()
    }
}

/// Draws every bank entry i.i.d. uniform on `[-0.5/p, 0.5/p]` and normalizes
/// it onto the sphere. Deterministic for a given RNG state.
pub fn init_params<T: Scalar, R: Rng>(
    vocab_size: usize,
    n_docs: usize,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<ModelParams<T>> {
    config.validate()?;
    if vocab_size == 0 || n_docs == 0 {
        return Err(Error::EmptyCorpus(
            "cannot initialize parameters for an empty vocabulary or corpus".into(),
        ));
    }
    Ok(ModelParams {
        center_words: ParamBank::init(vocab_size, config.dim, config.word_cols, rng),
        context_words: ParamBank::init(vocab_size, config.dim, config.word_cols, rng),
        docs: ParamBank::init(n_docs, config.dim, config.doc_cols, rng),
    })
}

/// Scratch space for one tuple's loss and gradients; reused across the
/// training loop to keep the hot path allocation-free.
struct TupleScratch<T> {
    v: Vec<T>,
    u: Vec<T>,
    d: Vec<T>,
    negs: Vec<T>, // n_negs entries, stride p * r1
    sv: Vec<T>,
    su: Vec<T>,
    sd: Vec<T>,
    sns: Vec<T>,    // colsums of negatives, stride p
    base: Vec<T>,   // sum over active negatives of (colsum(N) - colsum(U))
    gu_col: Vec<T>, // per-column gradient for U
    gn_col: Vec<T>, // per-column gradient for each active negative
    active: Vec<bool>,
    grad_word: Vec<T>, // broadcast buffer, p * r1
    grad_doc: Vec<T>,  // broadcast buffer, p * r2
}

impl<T: Scalar> TupleScratch<T> {
    fn new(p: usize, r1: usize, r2: usize, n_negs: usize) -> Self {
        TupleScratch {
            v: vec![T::zero(); p * r1],
            u: vec![T::zero(); p * r1],
            d: vec![T::zero(); p * r2],
            negs: vec![T::zero(); n_negs * p * r1],
            sv: vec![T::zero(); p],
            su: vec![T::zero(); p],
            sd: vec![T::zero(); p],
            sns: vec![T::zero(); n_negs * p],
            base: vec![T::zero(); p],
            gu_col: vec![T::zero(); p],
            gn_col: vec![T::zero(); p],
            active: vec![false; n_negs],
            grad_word: vec![T::zero(); p * r1],
            grad_doc: vec![T::zero(); p * r2],
        }
    }

    /// Computes hinge losses and the per-column gradient vectors from the
    /// already-filled parameter buffers. Returns (loss, active negatives).
    ///
    /// `scale` is 1 for summed negatives or 1/n for averaging.
    fn compute(&mut self, p: usize, r1: usize, r2: usize, margin: T, scale: T) -> (T, usize) {
        let n_negs = self.active.len();
        column_sum_into(&self.v, r1, &mut self.sv);
        column_sum_into(&self.u, r1, &mut self.su);
        column_sum_into(&self.d, r2, &mut self.sd);
        for (k, neg) in self.negs.chunks_exact(p * r1).enumerate() {
            column_sum_into(neg, r1, &mut self.sns[k * p..(k + 1) * p]);
        }

        let g_vu = sim_from_colsums(&self.sv, r1, &self.su, r1);
        let g_ud = sim_from_colsums(&self.su, r1, &self.sd, r2);

        let mut loss = T::zero();
        let mut n_active = 0usize;
        for x in self.base.iter_mut() {
            *x = T::zero();
        }
        for k in 0..n_negs {
            let sn = &self.sns[k * p..(k + 1) * p];
            let g_vn = sim_from_colsums(&self.sv, r1, sn, r1);
            let g_nd = sim_from_colsums(sn, r1, &self.sd, r2);
            let hinge = margin - g_vu - g_ud + g_vn + g_nd;
            let is_active = hinge > T::zero();
            self.active[k] = is_active;
            if is_active {
                loss = loss + scale * hinge;
                n_active += 1;
                for (b, &s) in self.base.iter_mut().zip(sn) {
                    *b = *b + s;
                }
            }
        }
        if n_active > 0 {
            let na = T::from_usize(n_active).unwrap();
            let inv_r1r1 = T::one() / T::from_usize(r1 * r1).unwrap();
            let inv_r1r2 = T::one() / T::from_usize(r1 * r2).unwrap();
            for i in 0..p {
                self.base[i] = (self.base[i] - na * self.su[i]) * scale;
                self.gu_col[i] = -(self.sv[i] * inv_r1r1 + self.sd[i] * inv_r1r2) * na * scale;
                self.gn_col[i] = (self.sv[i] * inv_r1r1 + self.sd[i] * inv_r1r2) * scale;
            }
        }
        (loss, n_active)
    }

    /// Per-column gradient for V: `base / r1^2`.
    fn v_col(&self, r1: usize, out: &mut [T]) {
        let inv = T::one() / T::from_usize(r1 * r1).unwrap();
        for (o, &b) in out.iter_mut().zip(&self.base) {
            *o = b * inv;
        }
    }

    /// Per-column gradient for D: `base / (r1 * r2)`.
    fn d_col(&self, r1: usize, r2: usize, out: &mut [T]) {
        let inv = T::one() / T::from_usize(r1 * r2).unwrap();
        for (o, &b) in out.iter_mut().zip(&self.base) {
            *o = b * inv;
        }
    }
}

fn check_tuple_shapes<T: Scalar>(
    v: &MatrixEmbedding<T>,
    u: &MatrixEmbedding<T>,
    negatives: &[MatrixEmbedding<T>],
    d: &MatrixEmbedding<T>,
) -> Result<()> {
    let (p, r1) = (v.rows(), v.cols());
    for (name, m) in std::iter::once(("center", u)).chain(negatives.iter().map(|n| ("negative", n)))
    {
        if m.rows() != p || m.cols() != r1 {
            return Err(Error::shape(
                "word matrices in a tuple must share shape",
                format!("{p}x{r1}"),
                format!("{name} is {}x{}", m.rows(), m.cols()),
            ));
        }
    }
    if d.rows() != p {
        return Err(Error::shape("document matrix row dimension", p, d.rows()));
    }
    Ok(())
}

fn fill_scratch<T: Scalar>(
    scratch: &mut TupleScratch<T>,
    v: &MatrixEmbedding<T>,
    u: &MatrixEmbedding<T>,
    negatives: &[MatrixEmbedding<T>],
    d: &MatrixEmbedding<T>,
) {
    scratch.v.copy_from_slice(v.as_slice());
    scratch.u.copy_from_slice(u.as_slice());
    scratch.d.copy_from_slice(d.as_slice());
    let stride = v.rows() * v.cols();
    for (k, n) in negatives.iter().enumerate() {
        scratch.negs[k * stride..(k + 1) * stride].copy_from_slice(n.as_slice());
    }
}

/// Hinge loss of one tuple: sum over negatives of
/// `max(0, m - sim(V,U) - sim(U,D) + sim(V,N) + sim(N,D))`.
pub fn margin_loss<T: Scalar>(
    v: &MatrixEmbedding<T>,
    u: &MatrixEmbedding<T>,
    negatives: &[MatrixEmbedding<T>],
    d: &MatrixEmbedding<T>,
    margin: T,
) -> Result<T> {
    check_tuple_shapes(v, u, negatives, d)?;
    let (p, r1, r2) = (v.rows(), v.cols(), d.cols());
    let mut scratch = TupleScratch::new(p, r1, r2, negatives.len());
    fill_scratch(&mut scratch, v, u, negatives, d);
    let (loss, _) = scratch.compute(p, r1, r2, margin, T::one());
    Ok(loss)
}

/// Euclidean gradients of [`margin_loss`] with respect to every tuple
/// member, as row-major buffers matching each parameter's shape. Inactive
/// hinges contribute nothing; the subgradient at exactly zero is zero.
#[derive(Debug, Clone)]
pub struct TupleGrads<T> {
    pub loss: T,
    pub active_negatives: usize,
    pub wrt_v: Vec<T>,
    pub wrt_u: Vec<T>,
    pub wrt_negatives: Vec<Vec<T>>,
    pub wrt_d: Vec<T>,
}

pub fn margin_loss_grads<T: Scalar>(
    v: &MatrixEmbedding<T>,
    u: &MatrixEmbedding<T>,
    negatives: &[MatrixEmbedding<T>],
    d: &MatrixEmbedding<T>,
    margin: T,
) -> Result<TupleGrads<T>> {
    check_tuple_shapes(v, u, negatives, d)?;
    let (p, r1, r2) = (v.rows(), v.cols(), d.cols());
    let mut scratch = TupleScratch::new(p, r1, r2, negatives.len());
    fill_scratch(&mut scratch, v, u, negatives, d);
    let (loss, n_active) = scratch.compute(p, r1, r2, margin, T::one());

    let mut grads = TupleGrads {
        loss,
        active_negatives: n_active,
        wrt_v: vec![T::zero(); p * r1],
        wrt_u: vec![T::zero(); p * r1],
        wrt_negatives: vec![vec![T::zero(); p * r1]; negatives.len()],
        wrt_d: vec![T::zero(); p * r2],
    };
    if n_active == 0 {
        return Ok(grads);
    }
    let mut col = vec![T::zero(); p];
    scratch.v_col(r1, &mut col);
    broadcast_column(&col, T::one(), r1, &mut grads.wrt_v);
    broadcast_column(&scratch.gu_col, T::one(), r1, &mut grads.wrt_u);
    scratch.d_col(r1, r2, &mut col);
    broadcast_column(&col, T::one(), r2, &mut grads.wrt_d);
    for (k, g) in grads.wrt_negatives.iter_mut().enumerate() {
        if scratch.active[k] {
            broadcast_column(&scratch.gn_col, T::one(), r1, g);
        }
    }
    Ok(grads)
}

/// One Riemannian step: flatten, project the Euclidean gradient onto the
/// tangent space at the parameter, retract with step `lr`, unflatten.
pub fn apply_update<T: Scalar>(
    param: &MatrixEmbedding<T>,
    euclid_grad: &[T],
    lr: T,
) -> Result<MatrixEmbedding<T>> {
    if euclid_grad.len() != param.rows() * param.cols() {
        return Err(Error::shape(
            "apply_update gradient length",
            param.rows() * param.cols(),
            euclid_grad.len(),
        ));
    }
    if let Some(x) = euclid_grad.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("gradient entry {x}")));
    }
    if !(lr > T::zero()) || !lr.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "learning rate must be positive and finite, got {lr}"
        )));
    }
    if euclid_grad.iter().all(|&x| x == T::zero()) {
        return Ok(param.clone());
    }
    let (p, r) = (param.rows(), param.cols());
    let mut data = param.as_slice().to_vec();
    descend_in_place(&mut data, euclid_grad, lr);
    Ok(MatrixEmbedding::from_raw_unchecked(data, p, r))
}

/// Telemetry from a training run.
pub struct TrainOutput<T: Scalar> {
    pub params: ModelParams<T>,
    /// Mean hinge loss per (center, context) pair, one entry per epoch.
    pub epoch_mean_loss: Vec<f64>,
    /// Largest `|norm - 1|` found by any end-of-epoch renormalization audit.
    pub max_norm_drift: f64,
}

/// Trains word and document banks over the corpus.
pub fn train<T: Scalar>(corpus: &Corpus, config: &TrainConfig) -> Result<TrainOutput<T>> {
    config.validate()?;
    if corpus.vocab.total_tokens() == 0 {
        return Err(Error::EmptyCorpus("no trainable tokens".into()));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params: ModelParams<T> =
        init_params(corpus.vocab.len(), corpus.docs.len(), config, &mut init_rng)?;
    let table = NegativeTable::unigram_smoothed(&corpus.vocab)?;

    let total_scheduled = (config.iterations as u64) * corpus.vocab.total_tokens();
    let processed = AtomicU64::new(0);

    let n_workers = config.threads.min(corpus.docs.len()).max(1);
    let mut worker_rngs: Vec<ChaCha8Rng> = (0..n_workers)
        .map(|w| ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(w as u64)))
        .collect();
    let shard_size = corpus.docs.len().div_ceil(n_workers);

    let mut epoch_mean_loss = Vec::with_capacity(config.iterations);
    let mut max_norm_drift = 0.0f64;

    for epoch in 0..config.iterations {
        let (loss_sum, pair_count) = if n_workers == 1 {
            run_shard(
                &corpus.docs,
                corpus,
                config,
                &params,
                &table,
                &processed,
                total_scheduled,
                &mut worker_rngs[0],
            )
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = corpus
                    .docs
                    .chunks(shard_size)
                    .zip(worker_rngs.iter_mut())
                    .map(|(shard, rng)| {
                        let params = &params;
                        let table = &table;
                        let processed = &processed;
                        scope.spawn(move || {
                            run_shard(
                                shard,
                                corpus,
                                config,
                                params,
                                table,
                                processed,
                                total_scheduled,
                                rng,
                            )
                        })
                    })
                    .collect();
                let mut loss = 0.0f64;
                let mut pairs = 0u64;
                for h in handles {
                    let (l, c) = h.join().expect("training worker panicked");
                    loss += l;
                    pairs += c;
                }
                (loss, pairs)
            })
        };

        let mean = if pair_count > 0 {
            loss_sum / pair_count as f64
        } else {
            0.0
        };
        epoch_mean_loss.push(mean);

        let drift = params
            .center_words
            .renormalize()
            .max(params.context_words.renormalize())
            .max(params.docs.renormalize());
        max_norm_drift = max_norm_drift.max(drift);
        log::debug!(
            "epoch {}/{}: mean pair loss {:.6}, max norm drift {:.3e}",
            epoch + 1,
            config.iterations,
            mean,
            drift
        );
    }

    Ok(TrainOutput {
        params,
        epoch_mean_loss,
        max_norm_drift,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_shard<T: Scalar>(
    shard: &[crate::corpus::Document],
    corpus: &Corpus,
    config: &TrainConfig,
    params: &ModelParams<T>,
    table: &NegativeTable,
    processed: &AtomicU64,
    total_scheduled: u64,
    rng: &mut ChaCha8Rng,
) -> (f64, u64) {
    let (p, r1, r2) = (config.dim, config.word_cols, config.doc_cols);
    let mut scratch = TupleScratch::<T>::new(p, r1, r2, config.negatives);
    let scale = if config.average_negatives {
        T::one() / T::from_usize(config.negatives).unwrap()
    } else {
        T::one()
    };
    let margin = T::c(config.margin);
    let alpha_floor = config.alpha * 1e-4;

    let mut kept: Vec<u32> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut neg_ids: Vec<u32> = Vec::with_capacity(config.negatives);
    let mut col = vec![T::zero(); p];

    let mut loss_sum = 0.0f64;
    let mut pair_count = 0u64;

    for doc in shard {
        if doc.token_ids.is_empty() {
            continue;
        }
        let done = processed.fetch_add(doc.token_ids.len() as u64, Ordering::Relaxed);
        let frac = 1.0 - done as f64 / total_scheduled as f64;
        let lr = T::c((config.alpha * frac).max(alpha_floor));

        kept.clear();
        kept.extend(doc.token_ids.iter().copied().filter(|&id| {
            subsample_keep(
                corpus.vocab.count(id),
                corpus.vocab.total_tokens(),
                config.subsample,
                rng,
            )
        }));
        if kept.len() < 2 {
            continue;
        }

        pairs.clear();
        pairs.extend(iter_windows(&kept, config.window, rng));

        for &(center, context) in &pairs {
            neg_ids.clear();
            for _ in 0..config.negatives {
                neg_ids.push(table.sample_excluding(center, rng));
            }

            params
                .context_words
                .read_into(context as usize, &mut scratch.v);
            params
                .center_words
                .read_into(center as usize, &mut scratch.u);
            params.docs.read_into(doc.doc_id as usize, &mut scratch.d);
            let stride = p * r1;
            for (k, &n) in neg_ids.iter().enumerate() {
                params
                    .center_words
                    .read_into(n as usize, &mut scratch.negs[k * stride..(k + 1) * stride]);
            }

            let (loss, n_active) = scratch.compute(p, r1, r2, margin, scale);
            loss_sum += loss.to_f64().unwrap_or(0.0);
            pair_count += 1;
            if n_active == 0 {
                continue;
            }

            // All gradients come from the pre-update snapshot; updates land
            // in bank order V, U, D, then each active negative.
            scratch.v_col(r1, &mut col);
            broadcast_column(&col, T::one(), r1, &mut scratch.grad_word);
            descend_in_place(&mut scratch.v, &scratch.grad_word, lr);
            params.context_words.write(context as usize, &scratch.v);

            broadcast_column(&scratch.gu_col, T::one(), r1, &mut scratch.grad_word);
            descend_in_place(&mut scratch.u, &scratch.grad_word, lr);
            params.center_words.write(center as usize, &scratch.u);

            scratch.d_col(r1, r2, &mut col);
            broadcast_column(&col, T::one(), r2, &mut scratch.grad_doc);
            descend_in_place(&mut scratch.d, &scratch.grad_doc, lr);
            params.docs.write(doc.doc_id as usize, &scratch.d);

            broadcast_column(&scratch.gn_col, T::one(), r1, &mut scratch.grad_word);
            for (k, &n) in neg_ids.iter().enumerate() {
                if scratch.active[k] {
                    let buf = &mut scratch.negs[k * stride..(k + 1) * stride];
                    descend_in_place(buf, &scratch.grad_word, lr);
                    params.center_words.write(n as usize, buf);
                }
            }
        }
    }
    (loss_sum, pair_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_from_lines;
    use crate::similarity::pairwise_sim;

    fn random_unit(rng: &mut ChaCha8Rng, p: usize, r: usize) -> MatrixEmbedding<f64> {
        let data: Vec<f64> = (0..p * r).map(|_| rng.random_range(-1.0..1.0)).collect();
        MatrixEmbedding::normalized(data, p, r).unwrap()
    }

    fn basis_vector(p: usize, i: usize) -> MatrixEmbedding<f64> {
        let mut data = vec![0.0; p];
        data[i] = 1.0;
        MatrixEmbedding::new(data, p, 1).unwrap()
    }

    // Loss recomputed through a literal double-sum similarity, independent
    // of the column-sum path.
    fn oracle_sim(a: &MatrixEmbedding<f64>, b: &MatrixEmbedding<f64>) -> f64 {
        let (p, r1, r2) = (a.rows(), a.cols(), b.cols());
        let mut acc = 0.0;
        for i in 0..r1 {
            for j in 0..r2 {
                for row in 0..p {
                    acc += a.get(row, i) * b.get(row, j);
                }
            }
        }
        acc / (r1 * r2) as f64
    }

    fn oracle_loss(
        v: &MatrixEmbedding<f64>,
        u: &MatrixEmbedding<f64>,
        negs: &[MatrixEmbedding<f64>],
        d: &MatrixEmbedding<f64>,
        m: f64,
    ) -> f64 {
        negs.iter()
            .map(|n| {
                (m - oracle_sim(v, u) - oracle_sim(u, d) + oracle_sim(v, n) + oracle_sim(n, d))
                    .max(0.0)
            })
            .sum()
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let c = TrainConfig {
            word_cols: 2,
            doc_cols: 1,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrainConfig {
            doc_cols: 200,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrainConfig {
            margin: 0.0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn init_produces_unit_norms_deterministically() {
        let config = TrainConfig {
            dim: 20,
            word_cols: 2,
            doc_cols: 3,
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: ModelParams<f64> = init_params(50, 30, &config, &mut rng).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b: ModelParams<f64> = init_params(50, 30, &config, &mut rng).unwrap();

        let mut buf_a = vec![0.0; 40];
        let mut buf_b = vec![0.0; 40];
        for i in 0..50 {
            a.center_words.read_into(i, &mut buf_a);
            b.center_words.read_into(i, &mut buf_b);
            assert_eq!(buf_a, buf_b);
            assert!((frobenius_norm(&buf_a) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_unit_vectors_are_nearly_orthogonal_on_average() {
        let config = TrainConfig {
            dim: 100,
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let params: ModelParams<f64> = init_params(2000, 1, &config, &mut rng).unwrap();
        let mats = params.center_words.to_matrices().unwrap();
        let mut mean = 0.0;
        for pair in 0..1000 {
            let a = &mats[2 * pair];
            let b = &mats[2 * pair + 1];
            mean += pairwise_sim(a, b).unwrap().abs();
        }
        mean /= 1000.0;
        assert!(mean < 0.15, "mean |sim| = {mean}");
    }

    #[test]
    fn loss_of_identical_unit_vectors_is_margin() {
        let x = basis_vector(4, 0);
        let m = 0.15;
        let loss = margin_loss(&x, &x, std::slice::from_ref(&x), &x, m).unwrap();
        assert!((loss - m).abs() < 1e-15);
    }

    #[test]
    fn loss_zero_when_margin_satisfied() {
        let x = basis_vector(4, 0);
        let n = basis_vector(4, 1);
        let loss = margin_loss(&x, &x, &[n], &x, 0.15).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn loss_matches_double_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let (p, r1, r2) = (6, 2, 3);
            let v = random_unit(&mut rng, p, r1);
            let u = random_unit(&mut rng, p, r1);
            let negs = vec![random_unit(&mut rng, p, r1), random_unit(&mut rng, p, r1)];
            let d = random_unit(&mut rng, p, r2);
            let m = rng.random_range(0.01..2.0);
            let got = margin_loss(&v, &u, &negs, &d, m).unwrap();
            let want = oracle_loss(&v, &u, &negs, &d, m);
            assert!((got - want).abs() < 1e-12, "got={got} want={want}");
        }
    }

    #[test]
    fn loss_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..500 {
            let v = random_unit(&mut rng, 5, 1);
            let u = random_unit(&mut rng, 5, 1);
            let negs = vec![random_unit(&mut rng, 5, 1)];
            let d = random_unit(&mut rng, 5, 2);
            let m = rng.random_range(0.001..1.0);
            assert!(margin_loss(&v, &u, &negs, &d, m).unwrap() >= 0.0);
        }
    }

    #[test]
    fn grads_zero_when_hinge_inactive() {
        let x = basis_vector(4, 0);
        let n = basis_vector(4, 1);
        let g = margin_loss_grads(&x, &x, &[n], &x, 0.15).unwrap();
        assert_eq!(g.active_negatives, 0);
        assert!(g.wrt_v.iter().all(|&x| x == 0.0));
        assert!(g.wrt_u.iter().all(|&x| x == 0.0));
        assert!(g.wrt_d.iter().all(|&x| x == 0.0));
        assert!(g.wrt_negatives[0].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn grads_reduce_to_vector_form_for_single_columns() {
        // r1 = r2 = 1: dL/dV = n - u, dL/dU = -(v + d), dL/dN = v + d,
        // dL/dD = n - u for an active hinge.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let p = 8;
        let v = random_unit(&mut rng, p, 1);
        let u = random_unit(&mut rng, p, 1);
        let n = random_unit(&mut rng, p, 1);
        let d = random_unit(&mut rng, p, 1);
        // margin large enough to force the hinge active
        let g = margin_loss_grads(&v, &u, std::slice::from_ref(&n), &d, 5.0).unwrap();
        assert_eq!(g.active_negatives, 1);
        for i in 0..p {
            let nv = n.as_slice()[i];
            let uv = u.as_slice()[i];
            let vv = v.as_slice()[i];
            let dv = d.as_slice()[i];
            assert!((g.wrt_v[i] - (nv - uv)).abs() < 1e-14);
            assert!((g.wrt_u[i] + (vv + dv)).abs() < 1e-14);
            assert!((g.wrt_negatives[0][i] - (vv + dv)).abs() < 1e-14);
            assert!((g.wrt_d[i] - (nv - uv)).abs() < 1e-14);
        }
    }

    #[test]
    fn grads_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let h = 1e-6;
        let p = 10;
        for r1 in 1..=4usize {
            for r2 in r1..=4usize {
                for _ in 0..100 {
                    let v = random_unit(&mut rng, p, r1);
                    let u = random_unit(&mut rng, p, r1);
                    let negs = vec![random_unit(&mut rng, p, r1), random_unit(&mut rng, p, r1)];
                    let d = random_unit(&mut rng, p, r2);
                    let m = 5.0; // all hinges active, far from the kink
                    let g = margin_loss_grads(&v, &u, &negs, &d, m).unwrap();
                    assert_eq!(g.active_negatives, 2);

                    let check = |analytic: &[f64], which: usize| {
                        let mut mats: Vec<MatrixEmbedding<f64>> = vec![
                            v.clone(),
                            u.clone(),
                            negs[0].clone(),
                            negs[1].clone(),
                            d.clone(),
                        ];
                        let (rows, cols) = (mats[which].rows(), mats[which].cols());
                        for idx in 0..rows * cols {
                            let eval = |mats: &[MatrixEmbedding<f64>]| {
                                oracle_loss(&mats[0], &mats[1], &mats[2..4], &mats[4], m)
                            };
                            let mut raw = mats[which].as_slice().to_vec();
                            let orig = raw[idx];
                            raw[idx] = orig + h;
                            mats[which] =
                                MatrixEmbedding::from_raw_for_test(raw.clone(), rows, cols);
                            let up = eval(&mats);
                            raw[idx] = orig - h;
                            mats[which] =
                                MatrixEmbedding::from_raw_for_test(raw.clone(), rows, cols);
                            let down = eval(&mats);
                            raw[idx] = orig;
                            mats[which] = MatrixEmbedding::from_raw_for_test(raw, rows, cols);
                            let fd = (up - down) / (2.0 * h);
                            let denom = fd.abs().max(1e-3);
                            assert!(
                                ((analytic[idx] - fd) / denom).abs() < 1e-5,
                                "param {which} entry {idx}: analytic={} fd={fd}",
                                analytic[idx]
                            );
                        }
                    };
                    check(&g.wrt_v, 0);
                    check(&g.wrt_u, 1);
                    check(&g.wrt_negatives[0], 2);
                    check(&g.wrt_negatives[1], 3);
                    check(&g.wrt_d, 4);
                }
            }
        }
    }

    #[test]
    fn apply_update_zero_gradient_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let m = random_unit(&mut rng, 6, 2);
        let zero = vec![0.0; 12];
        let out = apply_update(&m, &zero, 0.01).unwrap();
        assert_eq!(out.as_slice(), m.as_slice());
    }

    #[test]
    fn apply_update_preserves_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..500 {
            let m = random_unit(&mut rng, 7, 3);
            let grad: Vec<f64> = (0..21).map(|_| rng.random_range(-2.0..2.0)).collect();
            let out = apply_update(&m, &grad, rng.random_range(1e-4..0.1)).unwrap();
            assert!((frobenius_norm(out.as_slice()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_update_decreases_loss_on_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let lr = 1e-3;
        let mut mean_delta = 0.0;
        for _ in 0..100 {
            let (p, r1, r2) = (10, 2, 3);
            let v = random_unit(&mut rng, p, r1);
            let u = random_unit(&mut rng, p, r1);
            let negs = vec![random_unit(&mut rng, p, r1)];
            let d = random_unit(&mut rng, p, r2);
            let m = 5.0;
            let before = margin_loss(&v, &u, &negs, &d, m).unwrap();
            let g = margin_loss_grads(&v, &u, &negs, &d, m).unwrap();
            let v2 = apply_update(&v, &g.wrt_v, lr).unwrap();
            let u2 = apply_update(&u, &g.wrt_u, lr).unwrap();
            let n2 = apply_update(&negs[0], &g.wrt_negatives[0], lr).unwrap();
            let d2 = apply_update(&d, &g.wrt_d, lr).unwrap();
            let after = margin_loss(&v2, &u2, &[n2], &d2, m).unwrap();
            mean_delta += before - after;
        }
        mean_delta /= 100.0;
        assert!(mean_delta > 0.0, "mean decrease = {mean_delta}");
    }

    fn tiny_corpus() -> Corpus {
        // 100 documents over a 50-token vocabulary with repeating structure
        let mut rng = ChaCha8Rng::seed_from_u64(301);
        let lines: Vec<String> = (0..100)
            .map(|i| {
                let topic = i % 5;
                (0..12)
                    .map(|_| format!("w{}", topic * 10 + rng.random_range(0..10)))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        corpus_from_lines(lines.iter().map(|s| s.as_str()), 1).unwrap()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            dim: 16,
            word_cols: 1,
            doc_cols: 2,
            iterations: 5,
            window: 3,
            negatives: 2,
            min_count: 1,
            threads: 1,
            seed: 7,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn training_is_bit_deterministic_single_threaded() {
        let corpus = tiny_corpus();
        let config = small_config();
        let a = train::<f64>(&corpus, &config).unwrap();
        let b = train::<f64>(&corpus, &config).unwrap();
        assert_eq!(a.epoch_mean_loss, b.epoch_mean_loss);
        let len = a.params.docs.entry_len();
        let mut ba = vec![0.0; len];
        let mut bb = vec![0.0; len];
        for i in 0..corpus.docs.len() {
            a.params.docs.read_into(i, &mut ba);
            b.params.docs.read_into(i, &mut bb);
            assert_eq!(ba, bb);
        }
    }

    #[test]
    fn training_loss_decreases_on_tiny_corpus() {
        let corpus = tiny_corpus();
        let out = train::<f64>(&corpus, &small_config()).unwrap();
        let losses = &out.epoch_mean_loss;
        assert_eq!(losses.len(), 5);
        assert!(
            losses[4] < losses[0],
            "epoch losses did not decrease: {losses:?}"
        );
        // each epoch's mean should trend down at this scale
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] + 0.01, "loss bounced: {losses:?}");
        }
    }

    #[test]
    fn training_preserves_unit_norms() {
        let corpus = tiny_corpus();
        let out = train::<f64>(&corpus, &small_config()).unwrap();
        assert!(out.max_norm_drift < 1e-6, "drift = {}", out.max_norm_drift);
        for bank in [
            &out.params.center_words,
            &out.params.context_words,
            &out.params.docs,
        ] {
            let mut buf = vec![0.0; bank.entry_len()];
            for i in 0..bank.rows() {
                bank.read_into(i, &mut buf);
                assert!((frobenius_norm(&buf) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn training_runs_multithreaded() {
        let corpus = tiny_corpus();
        let config = TrainConfig {
            threads: 4,
            ..small_config()
        };
        let out = train::<f64>(&corpus, &config).unwrap();
        assert!(out.epoch_mean_loss.iter().all(|l| l.is_finite()));
        assert!(
            out.epoch_mean_loss[4] < out.epoch_mean_loss[0],
            "hogwild run failed to reduce loss: {:?}",
            out.epoch_mean_loss
        );
        assert!(out.max_norm_drift < 1e-6);
    }

    #[test]
    fn single_column_training_matches_cosine_formulation() {
        // With r1 = r2 = 1 the metric is exactly the dot product, so the
        // per-tuple loss must equal the cosine-based hinge for the same
        // parameters.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let p = 12;
            let v = random_unit(&mut rng, p, 1);
            let u = random_unit(&mut rng, p, 1);
            let n = random_unit(&mut rng, p, 1);
            let d = random_unit(&mut rng, p, 1);
            let m = 0.15;
            let cosine = |a: &MatrixEmbedding<f64>, b: &MatrixEmbedding<f64>| {
                a.as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
            };
            let jose =
                (m - cosine(&v, &u) - cosine(&u, &d) + cosine(&v, &n) + cosine(&n, &d)).max(0.0);
            let got = margin_loss(&v, &u, std::slice::from_ref(&n), &d, m).unwrap();
            assert_eq!(got, jose);
        }
    }

    #[test]
    fn averaging_negatives_matches_summing_for_one_negative() {
        // with a single negative the two aggregation modes coincide exactly
        let corpus = tiny_corpus();
        let base = TrainConfig {
            negatives: 1,
            ..small_config()
        };
        let summed = train::<f64>(&corpus, &base).unwrap();
        let averaged = train::<f64>(
            &corpus,
            &TrainConfig {
                average_negatives: true,
                ..base
            },
        )
        .unwrap();
        assert_eq!(summed.epoch_mean_loss, averaged.epoch_mean_loss);

        // with several negatives the averaged run still trains
        let avg2 = train::<f64>(
            &corpus,
            &TrainConfig {
                negatives: 3,
                average_negatives: true,
                ..small_config()
            },
        )
        .unwrap();
        assert!(avg2.epoch_mean_loss.iter().all(|l| l.is_finite()));
        assert!(avg2.epoch_mean_loss[4] < avg2.epoch_mean_loss[0]);
    }

    #[test]
    fn train_rejects_invalid_config() {
        let corpus = tiny_corpus();
        let config = TrainConfig {
            word_cols: 3,
            doc_cols: 2,
            ..small_config()
        };
        assert!(train::<f64>(&corpus, &config).is_err());
    }

    #[test]
    fn single_precision_instantiation_trains() {
        let corpus = tiny_corpus();
        let out = train::<f32>(&corpus, &small_config()).unwrap();
        assert!(out.epoch_mean_loss[4] < out.epoch_mean_loss[0]);
        assert!(out.max_norm_drift < 1e-4);
        let mut buf = vec![0.0f32; out.params.docs.entry_len()];
        for i in 0..out.params.docs.rows() {
            out.params.docs.read_into(i, &mut buf);
            assert!((frobenius_norm(&buf) - 1.0).abs() < 1e-5);
        }
    }
}
