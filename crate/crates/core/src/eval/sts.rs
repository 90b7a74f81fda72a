//! Semantic-textual-similarity evaluation: sentence pairs scored by the
//! pairwise similarity of their document matrices, ranked against gold
//! human judgements by Pearson correlation.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifold::MatrixEmbedding;
use crate::scalar::Scalar;
use crate::similarity::pairwise_sim;

use super::scores::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StsSplit {
    Train,
    Dev,
    Test,
}

impl fmt::Display for StsSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StsSplit::Train => write!(f, "train"),
            StsSplit::Dev => write!(f, "dev"),
            StsSplit::Test => write!(f, "test"),
        }
    }
}

/// One benchmark pair: document ids of both sentences, the gold similarity
/// in `[0, 5]`, and which split it came from.
#[derive(Debug, Clone)]
pub struct StsPair {
    pub sentence_a: u32,
    pub sentence_b: u32,
    pub gold: f64,
    pub split: StsSplit,
}

/// Accumulated benchmark: every sentence occurrence becomes its own
/// document (in file order), pairs reference them by id.
#[derive(Debug, Clone, Default)]
pub struct StsData {
    pub sentences: Vec<String>,
    pub pairs: Vec<StsPair>,
    /// Malformed rows skipped across all loads.
    pub skipped: usize,
}

impl StsData {
    /// Appends one tab-separated benchmark file
    /// (`genre file year id score sentence1 sentence2 [extra...]`).
    /// Rows that do not parse are counted and skipped.
    pub fn load_file(&mut self, path: &Path, split: StsSplit) -> Result<()> {
        let reader = BufReader::new(File::open(path)?);
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match parse_row(&line) {
                Some((score, s1, s2)) => {
                    let a = self.sentences.len() as u32;
                    self.sentences.push(s1.to_string());
                    self.sentences.push(s2.to_string());
                    self.pairs.push(StsPair {
                        sentence_a: a,
                        sentence_b: a + 1,
                        gold: score,
                        split,
                    });
                }
                None => self.skipped += 1,
            }
        }
        Ok(())
    }
}

fn parse_row(line: &str) -> Option<(f64, &str, &str)> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 7 {
        return None;
    }
    let score: f64 = fields[4].trim().parse().ok()?;
    if !(0.0..=5.0).contains(&score) {
        return None;
    }
    let s1 = fields[5].trim();
    let s2 = fields[6].trim();
    if s1.is_empty() || s2.is_empty() {
        return None;
    }
    Some((score, s1, s2))
}

/// Scores every pair as `pairwise_sim(doc_a, doc_b)` and returns the Pearson
/// correlation against gold for the dev and test splits.
pub fn sts_evaluate<T: Scalar>(
    doc_bank: &[MatrixEmbedding<T>],
    pairs: &[StsPair],
) -> Result<(f64, f64)> {
    let split_scores = |split: StsSplit| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut model = Vec::new();
        let mut gold = Vec::new();
        for pair in pairs.iter().filter(|p| p.split == split) {
            let a = doc_bank.get(pair.sentence_a as usize).ok_or_else(|| {
                Error::InvalidLabels(format!(
                    "sentence id {} outside document bank of {}",
                    pair.sentence_a,
                    doc_bank.len()
                ))
            })?;
            let b = doc_bank.get(pair.sentence_b as usize).ok_or_else(|| {
                Error::InvalidLabels(format!(
                    "sentence id {} outside document bank of {}",
                    pair.sentence_b,
                    doc_bank.len()
                ))
            })?;
            model.push(pairwise_sim(a, b)?.to_f64().unwrap_or(f64::NAN));
            gold.push(pair.gold);
        }
        Ok((model, gold))
    };

    let (dev_model, dev_gold) = split_scores(StsSplit::Dev)?;
    let (test_model, test_gold) = split_scores(StsSplit::Test)?;
    Ok((
        pearson(&dev_model, &dev_gold)?,
        pearson(&test_model, &test_gold)?,
    ))
}
