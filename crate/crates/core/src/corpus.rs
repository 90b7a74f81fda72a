//! Corpus ingestion: tokenization, vocabulary construction, frequent-word
//! subsampling, dynamic context windows, and the negative-sampling table.
//!
//! A corpus is UTF-8 plain text with one document per line. Tokenization
//! lowercases and isolates punctuation as separate tokens, so corpora can be
//! pre-tokenized externally and reproduced bit-exactly.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Token inventory with dense ids `0..n-1`, raw corpus counts, and the total
/// number of in-vocabulary token occurrences.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    counts: Vec<u64>,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.id_to_token[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    /// Corpus length after min-count filtering (sum of kept counts).
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }
}

/// One document: a dense id and its in-vocabulary token ids, in order.
#[derive(Debug, Clone)]
pub struct Document {
    pub doc_id: u32,
    pub token_ids: Vec<u32>,
}

/// A tokenized corpus ready for training.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocab: Vocabulary,
    pub docs: Vec<Document>,
}

/// Lowercases and splits on whitespace after isolating punctuation
/// characters as separate tokens.
pub fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in line.chars() {
        if ch.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if ch.is_ascii_punctuation() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            out.push(ch.to_string());
        } else {
            for lc in ch.to_lowercase() {
                cur.push(lc);
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Counts tokens over a stream of documents and keeps those with frequency
/// `>= min_count`. Ids are assigned in order of first appearance.
pub fn build_vocab<'a, I>(docs: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut first_seen: Vec<String> = Vec::new();
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in docs {
        for token in doc {
            match counts.get_mut(token) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(token.clone(), 1);
                    first_seen.push(token.clone());
                }
            }
        }
    }

    let mut vocab = Vocabulary {
        token_to_id: HashMap::new(),
        id_to_token: Vec::new(),
        counts: Vec::new(),
        total_tokens: 0,
    };
    for token in first_seen {
        let c = counts[&token];
        if c >= min_count {
            let id = vocab.id_to_token.len() as u32;
            vocab.token_to_id.insert(token.clone(), id);
            vocab.id_to_token.push(token);
            vocab.counts.push(c);
            vocab.total_tokens += c;
        }
    }
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no token reaches min_count = {min_count}"
        )));
    }
    Ok(vocab)
}

/// Reads a one-document-per-line corpus file, builds the vocabulary, and maps
/// every line to its in-vocabulary token ids. Lines that end up empty are
/// kept as empty documents so line numbers stay aligned with label files.
pub fn load_corpus(path: &Path, min_count: u64) -> Result<Corpus> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    corpus_from_lines(text.lines(), min_count)
}

pub fn corpus_from_lines<'a, I>(lines: I, min_count: u64) -> Result<Corpus>
where
    I: IntoIterator<Item = &'a str>,
{
    let tokenized: Vec<Vec<String>> = lines.into_iter().map(tokenize).collect();
    if tokenized.is_empty() {
        return Err(Error::EmptyCorpus("corpus has no documents".into()));
    }
    let vocab = build_vocab(tokenized.iter().map(|d| d.as_slice()), min_count)?;
    let docs = tokenized
        .iter()
        .enumerate()
        .map(|(i, tokens)| Document {
            doc_id: i as u32,
            token_ids: tokens.iter().filter_map(|t| vocab.id(t)).collect(),
        })
        .collect();
    Ok(Corpus { vocab, docs })
}

/// Probability of keeping a token with `count` occurrences out of `total`,
/// at threshold `t`: `min(1, sqrt(t/f) + t/f)` with `f = count / total`.
pub fn keep_probability(count: u64, total: u64, t: f64) -> f64 {
    let f = count as f64 / total as f64;
    ((t / f).sqrt() + t / f).min(1.0)
}

/// One subsampling draw for a token: true means keep.
pub fn subsample_keep<R: Rng>(count: u64, total: u64, t: f64, rng: &mut R) -> bool {
    let p = keep_probability(count, total, t);
    p >= 1.0 || rng.random::<f64>() < p
}

/// Context offsets for the center at `pos` in a document of length `len`,
/// with effective window `b`: all positions within distance `b`, clipped at
/// the boundaries, excluding the center itself.
pub(crate) fn window_range(len: usize, pos: usize, b: usize) -> (usize, usize) {
    (pos.saturating_sub(b), (pos + b).min(len - 1))
}

/// Streams `(center_id, context_id)` pairs over a token sequence. For each
/// center position an effective window is drawn uniformly from
/// `1..=max_window`, shrinking the fixed maximum the way word2vec does.
pub struct WindowIter<'a, R: Rng> {
    tokens: &'a [u32],
    max_window: usize,
    rng: &'a mut R,
    pos: usize,
    lo: usize,
    hi: usize,
    cursor: usize,
    done: bool,
}

pub fn iter_windows<'a, R: Rng>(
    tokens: &'a [u32],
    max_window: usize,
    rng: &'a mut R,
) -> WindowIter<'a, R> {
    assert!(max_window >= 1, "window must be at least 1");
    let mut it = WindowIter {
        tokens,
        max_window,
        rng,
        pos: 0,
        lo: 0,
        hi: 0,
        cursor: 0,
        done: tokens.len() < 2,
    };
    if !it.done {
        it.enter_center();
    }
    it
}

impl<R: Rng> WindowIter<'_, R> {
    fn enter_center(&mut self) {
        let b = self.rng.random_range(1..=self.max_window);
        let (lo, hi) = window_range(self.tokens.len(), self.pos, b);
        self.lo = lo;
        self.hi = hi;
        self.cursor = lo;
    }

    fn advance_center(&mut self) {
        self.pos += 1;
        if self.pos >= self.tokens.len() {
            self.done = true;
        } else {
            self.enter_center();
        }
    }
}

impl<R: Rng> Iterator for WindowIter<'_, R> {
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        loop {
            if self.done {
                return None;
            }
            if self.cursor > self.hi {
                self.advance_center();
                continue;
            }
            let c = self.cursor;
            self.cursor += 1;
            if c == self.pos {
                continue;
            }
            return Some((self.tokens[self.pos], self.tokens[c]));
        }
    }
}

/// Walker alias table realizing `P(w) proportional to count(w)^power`.
/// Sampling is O(1) and exact.
#[derive(Debug, Clone)]
pub struct NegativeTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl NegativeTable {
    pub fn new(counts: &[u64], power: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyCorpus(
                "negative table over empty vocabulary".into(),
            ));
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateInput(
                "negative table weights must sum to a positive finite value".into(),
            ));
        }
        let n = weights.len();
        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias = vec![0u32; n];
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s as usize] = l;
            prob[l as usize] -= 1.0 - prob[s as usize];
            if prob[l as usize] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        for i in small.into_iter().chain(large) {
            prob[i as usize] = 1.0;
        }
        Ok(NegativeTable { prob, alias })
    }

    /// By-the-book distribution for negative sampling: counts^0.75.
    pub fn unigram_smoothed(vocab: &Vocabulary) -> Result<Self> {
        Self::new(vocab.counts(), 0.75)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let n = self.prob.len();
        let i = rng.random_range(0..n);
        if rng.random::<f64>() < self.prob[i] {
            i as u32
        } else {
            self.alias[i]
        }
    }

    /// Draws a negative that differs from `exclude`, retrying up to 100
    /// times before accepting a collision (only reachable when the
    /// distribution is concentrated on the excluded word).
    pub fn sample_excluding<R: Rng>(&self, exclude: u32, rng: &mut R) -> u32 {
        for _ in 0..100 {
            let s = self.sample(rng);
            if s != exclude {
                return s;
            }
        }
        self.sample(rng)
    }
}
