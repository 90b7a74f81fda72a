//! Similarity between matrix embeddings with arbitrary column counts.
//!
//! The metric is the mean dot product over all column pairs of the two
//! matrices. Both the metric and its gradient factor through per-matrix
//! column sums, which drops the cost from `O(p * r1 * r2)` to
//! `O(p * (r1 + r2))`; the double-sum form survives in the test suite as an
//! independent oracle.

use crate::error::{Error, Result};
use crate::manifold::MatrixEmbedding;
use crate::scalar::Scalar;

/// Cached column-wise sum of a matrix: the length-`p` vector `sum_j m[., j]`,
/// together with the column count it summarizes.
#[derive(Debug, Clone)]
pub struct ColumnSum<T: Scalar> {
    s: Vec<T>,
    r: usize,
}

impl<T: Scalar> ColumnSum<T> {
    pub fn of(m: &MatrixEmbedding<T>) -> Self {
        let mut cs = ColumnSum {
            s: vec![T::zero(); m.rows()],
            r: m.cols(),
        };
        column_sum_into(m.as_slice(), m.cols(), &mut cs.s);
        cs
    }

    pub fn as_slice(&self) -> &[T] {
        &self.s
    }

    pub fn cols(&self) -> usize {
        self.r
    }
}

/// Accumulates the column sum of a row-major `p x r` buffer into `out`
/// (length `p`).
pub(crate) fn column_sum_into<T: Scalar>(data: &[T], r: usize, out: &mut [T]) {
    debug_assert_eq!(data.len(), out.len() * r);
    for (row, o) in data.chunks_exact(r).zip(out.iter_mut()) {
        *o = row.iter().copied().sum();
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub(crate) fn sim_from_colsums<T: Scalar>(sa: &[T], ra: usize, sb: &[T], rb: usize) -> T {
    dot(sa, sb) / T::from_usize(ra * rb).unwrap()
}

fn check_rows<T: Scalar>(
    context: &'static str,
    a: &MatrixEmbedding<T>,
    b: &MatrixEmbedding<T>,
) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(Error::shape(context, a.rows(), b.rows()));
    }
    Ok(())
}

/// Similarity between two embeddings sharing row dimension `p`: the mean of
/// all pairwise column dot products, `(sum_i sum_j a_i . b_j) / (r1 * r2)`.
///
/// For single-column matrices this is exactly the cosine similarity of the
/// two unit vectors.
pub fn pairwise_sim<T: Scalar>(a: &MatrixEmbedding<T>, b: &MatrixEmbedding<T>) -> Result<T> {
    check_rows("pairwise_sim row dimension", a, b)?;
    let sa = ColumnSum::of(a);
    let sb = ColumnSum::of(b);
    Ok(sim_from_colsums(
        sa.as_slice(),
        a.cols(),
        sb.as_slice(),
        b.cols(),
    ))
}

/// Partial derivative of [`pairwise_sim`] with respect to the left argument,
/// returned as a row-major `p x r1` buffer. Every column equals
/// `colsum(B) / (r1 * r2)`.
pub fn pairwise_sim_grad_left<T: Scalar>(
    a: &MatrixEmbedding<T>,
    b: &MatrixEmbedding<T>,
) -> Result<Vec<T>> {
    check_rows("pairwise_sim_grad_left row dimension", a, b)?;
    let sb = ColumnSum::of(b);
    let scale = T::one() / T::from_usize(a.cols() * b.cols()).unwrap();
    let mut out = vec![T::zero(); a.rows() * a.cols()];
    broadcast_column(sb.as_slice(), scale, a.cols(), &mut out);
    Ok(out)
}

/// Writes `scale * col` into every column of a row-major `p x r` buffer.
pub(crate) fn broadcast_column<T: Scalar>(col: &[T], scale: T, r: usize, out: &mut [T]) {
    debug_assert_eq!(out.len(), col.len() * r);
    for (row, &c) in out.chunks_exact_mut(r).zip(col) {
        let v = scale * c;
        for x in row {
            *x = v;
        }
    }
}

/// Squared distance between two same-shape embeddings: the mean of squared
/// Euclidean distances over all column pairs,
/// `(sum_k sum_l ||u_k - v_l||^2) / r^2`.
///
/// Note this is not zero for `u == v` unless all columns coincide; it is the
/// metric as defined, not its Euclidean specialization.
pub fn squared_distance<T: Scalar>(u: &MatrixEmbedding<T>, v: &MatrixEmbedding<T>) -> Result<T> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::shape(
            "squared_distance requires identical shapes",
            format!("{}x{}", u.rows(), u.cols()),
            format!("{}x{}", v.rows(), v.cols()),
        ));
    }
    let su = ColumnSum::of(u);
    let sv = ColumnSum::of(v);
    Ok(squared_distance_cached(
        su.as_slice(),
        sq_sum(u.as_slice()),
        sv.as_slice(),
        sq_sum(v.as_slice()),
        u.cols(),
    ))
}

#[inline]
pub(crate) fn sq_sum<T: Scalar>(data: &[T]) -> T {
    data.iter().map(|&x| x * x).sum()
}

/// Expansion of the pairwise squared distance through column sums and squared
/// Frobenius norms:
/// `(r * (||U||_F^2 + ||V||_F^2) - 2 * colsum(U) . colsum(V)) / r^2`.
///
/// Exact for any inputs (no unit-norm assumption); for unit-norm matrices it
/// collapses to `2/r - 2 * pairwise_sim`.
#[inline]
pub(crate) fn squared_distance_cached<T: Scalar>(
    su: &[T],
    sq_u: T,
    sv: &[T],
    sq_v: T,
    r: usize,
) -> T {
    let rr = T::from_usize(r).unwrap();
    let num = rr * (sq_u + sq_v) - T::c(2.0) * dot(su, sv);
    num / (rr * rr)
}

/// RBF-style affinity `exp(-gamma * squared_distance(u, v))`, in `(0, 1]`.
pub fn affinity<T: Scalar>(u: &MatrixEmbedding<T>, v: &MatrixEmbedding<T>, gamma: T) -> Result<T> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "affinity kernel coefficient must be positive and finite, got {gamma}"
        )));
    }
    Ok((-gamma * squared_distance(u, v)?).exp())
}
