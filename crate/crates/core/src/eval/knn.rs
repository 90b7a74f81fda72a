//! k-nearest-neighbor classification under the pairwise squared distance.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::MatrixEmbedding;
use crate::scalar::Scalar;
use crate::similarity::{sq_sum, squared_distance_cached, ColumnSum};

/// Majority vote over the `k` training points closest to each query.
///
/// Neighbors are ranked by squared distance ascending, with ties broken by
/// lower training index; vote ties fall back to the single nearest
/// neighbor's label.
pub fn knn_classify<T: Scalar>(
    train: &[MatrixEmbedding<T>],
    train_labels: &[usize],
    queries: &[MatrixEmbedding<T>],
    k: usize,
) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::InvalidLabels("empty training set".into()));
    }
    if train.len() != train_labels.len() {
        return Err(Error::shape(
            "training embeddings vs labels",
            train.len(),
            train_labels.len(),
        ));
    }
    if k == 0 || k > train.len() {
        return Err(Error::InvalidConfig(format!(
            "k must be in 1..={}, got {k}",
            train.len()
        )));
    }
    let (p, r) = (train[0].rows(), train[0].cols());
    for m in train.iter().chain(queries) {
        if m.rows() != p || m.cols() != r {
            return Err(Error::shape(
                "knn embeddings must share one shape",
                format!("{p}x{r}"),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
    }

    let train_cache: Vec<(ColumnSum<T>, T)> = train
        .iter()
        .map(|m| (ColumnSum::of(m), sq_sum(m.as_slice())))
        .collect();

    let predictions: Vec<usize> = queries
        .par_iter()
        .map(|q| {
            let sq = ColumnSum::of(q);
            let qq = sq_sum(q.as_slice());
            let mut dists: Vec<(f64, usize)> = train_cache
                .iter()
                .enumerate()
                .map(|(i, (cs, ss))| {
                    let d = squared_distance_cached(sq.as_slice(), qq, cs.as_slice(), *ss, r);
                    (d.to_f64().unwrap_or(f64::INFINITY), i)
                })
                .collect();
            dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
            vote(&dists[..k], train_labels)
        })
        .collect();
    Ok(predictions)
}

fn vote(neighbors: &[(f64, usize)], labels: &[usize]) -> usize {
    let mut tally: Vec<(usize, usize)> = Vec::with_capacity(neighbors.len());
    for &(_, idx) in neighbors {
        let label = labels[idx];
        match tally.iter_mut().find(|(l, _)| *l == label) {
            Some((_, c)) => *c += 1,
            None => tally.push((label, 1)),
        }
    }
    let best = tally.iter().map(|&(_, c)| c).max().unwrap();
    let tied = tally.iter().filter(|&&(_, c)| c == best).count();
    if tied > 1 {
        // fall back to the single nearest neighbor
        labels[neighbors[0].1]
    } else {
        tally.iter().find(|&&(_, c)| c == best).unwrap().0
    }
}
