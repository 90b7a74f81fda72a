//! External clustering-quality measures over a cluster-vs-class
//! contingency table: purity, mutual information (nats), normalized mutual
//! information, and the adjusted Rand index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster-vs-class count matrix with cached marginals.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    counts: Vec<u64>, // row-major, clusters x classes
    clusters: usize,
    classes: usize,
    row_marginals: Vec<u64>,
    col_marginals: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<u64>, clusters: usize, classes: usize) -> Result<Self> {
        if clusters == 0 || classes == 0 || counts.len() != clusters * classes {
            return Err(Error::shape(
                "contingency table dimensions",
                format!("{clusters}x{classes}"),
                counts.len(),
            ));
        }
        let mut row = vec![0u64; clusters];
        let mut col = vec![0u64; classes];
        let mut total = 0u64;
        for i in 0..clusters {
            for j in 0..classes {
                let c = counts[i * classes + j];
                row[i] += c;
                col[j] += c;
                total += c;
            }
        }
        if total == 0 {
            return Err(Error::InvalidLabels("contingency table is empty".into()));
        }
        Ok(ContingencyTable {
            counts,
            clusters,
            classes,
            row_marginals: row,
            col_marginals: col,
            total,
        })
    }

    /// Builds the table from aligned label vectors. Labels may be arbitrary
    /// nonnegative integers; rows/columns are indexed by the distinct values
    /// in order of first appearance.
    pub fn from_labels(predicted: &[usize], gold: &[usize]) -> Result<Self> {
        if predicted.len() != gold.len() {
            return Err(Error::shape(
                "label vector lengths",
                gold.len(),
                predicted.len(),
            ));
        }
        if predicted.is_empty() {
            return Err(Error::InvalidLabels("empty label vectors".into()));
        }
        let index = |values: &[usize]| {
            let mut map = std::collections::HashMap::new();
            let mut dense = Vec::with_capacity(values.len());
            for &v in values {
                let next = map.len();
                dense.push(*map.entry(v).or_insert(next));
            }
            (dense, map.len())
        };
        let (rows, clusters) = index(predicted);
        let (cols, classes) = index(gold);
        let mut counts = vec![0u64; clusters * classes];
        for (&i, &j) in rows.iter().zip(&cols) {
            counts[i * classes + j] += 1;
        }
        Self::from_counts(counts, clusters, classes)
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn count(&self, cluster: usize, class: usize) -> u64 {
        self.counts[cluster * self.classes + class]
    }

    pub fn cluster_sizes(&self) -> &[u64] {
        &self.row_marginals
    }

    pub fn class_sizes(&self) -> &[u64] {
        &self.col_marginals
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Fraction of points that belong to their cluster's majority class.
pub fn purity(t: &ContingencyTable) -> f64 {
    let hits: u64 = (0..t.clusters)
        .map(|i| (0..t.classes).map(|j| t.count(i, j)).max().unwrap_or(0))
        .sum();
    hits as f64 / t.total as f64
}

/// Mutual information between the cluster and class partitions, in nats,
/// with the usual `0 * ln 0 = 0` convention.
pub fn mutual_info(t: &ContingencyTable) -> f64 {
    let n = t.total as f64;
    let mut mi = 0.0;
    for i in 0..t.clusters {
        for j in 0..t.classes {
            let nij = t.count(i, j);
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            let ai = t.row_marginals[i] as f64;
            let bj = t.col_marginals[j] as f64;
            mi += (nij / n) * ((nij * n) / (ai * bj)).ln();
        }
    }
    mi
}

fn entropy(marginals: &[u64], total: u64) -> f64 {
    let n = total as f64;
    marginals
        .iter()
        .filter(|&&m| m > 0)
        .map(|&m| {
            let p = m as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// How the entropy pair is folded into the NMI denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NmiNorm {
    /// `(H(clusters) + H(classes)) / 2` — the common library default.
    Arithmetic,
    /// `sqrt(H(clusters) * H(classes))`.
    Geometric,
}

/// Mutual information normalized into `[0, 1]`. When either partition has
/// zero entropy (a single cluster or class) and the MI is zero, the score is
/// defined as 0.
pub fn nmi(t: &ContingencyTable, norm: NmiNorm) -> f64 {
    let mi = mutual_info(t);
    let hr = entropy(&t.row_marginals, t.total);
    let hc = entropy(&t.col_marginals, t.total);
    let denom = match norm {
        NmiNorm::Arithmetic => 0.5 * (hr + hc),
        NmiNorm::Geometric => (hr * hc).sqrt(),
    };
    if denom <= 0.0 {
        return 0.0;
    }
    mi / denom
}

fn choose2(n: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index: pair-counting agreement corrected for chance,
/// in `[-1, 1]` with 1 for identical partitions and ~0 for independent ones.
pub fn adjusted_rand_index(t: &ContingencyTable) -> f64 {
    let sum_ij: f64 = t.counts.iter().map(|&c| choose2(c)).sum();
    let sum_a: f64 = t.row_marginals.iter().map(|&a| choose2(a)).sum();
    let sum_b: f64 = t.col_marginals.iter().map(|&b| choose2(b)).sum();
    let pairs = choose2(t.total);
    let expected = sum_a * sum_b / pairs;
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < f64::EPSILON {
        // both partitions are single blocks (or single points): define as 1
        // when they agree perfectly, which is the only way to land here
        return 1.0;
    }
    (sum_ij - expected) / (max_index - expected)
}
