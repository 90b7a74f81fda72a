//! Matrix-on-sphere primitives.
//!
//! Embeddings live in the set of `p x r` real matrices with unit Frobenius
//! norm. Flattening such a matrix row-major gives a unit vector in `p*r`
//! dimensions, so gradient steps reduce to the familiar sphere recipe:
//! project the ambient gradient onto the tangent space, step, renormalize.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A `p x r` real matrix with unit Frobenius norm, stored row-major
/// (element `(i, j)` at index `i * r + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEmbedding<T: Scalar> {
    data: Vec<T>,
    p: usize,
    r: usize,
}

/// A flattened [`MatrixEmbedding`]: a unit vector of length `p * r` that
/// remembers its original shape. Round-trips are exact because flattening
/// is a reinterpretation of the same row-major buffer, not a copy.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatEmbedding<T: Scalar> {
    data: Vec<T>,
    p: usize,
    r: usize,
}

/// Frobenius norm: square root of the sum of squared entries.
pub fn frobenius_norm<T: Scalar>(m: &[T]) -> T {
    m.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn check_shape<T: Scalar>(data: &[T], p: usize, r: usize) -> Result<()> {
    if r < 1 || p < 1 {
        return Err(Error::shape(
            "matrix embedding dimensions",
            "p >= 1 and r >= 1",
            format!("p={p}, r={r}"),
        ));
    }
    if data.len() != p * r {
        return Err(Error::shape(
            "matrix embedding buffer length",
            p * r,
            data.len(),
        ));
    }
    if let Some(x) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("matrix entry {x}")));
    }
    Ok(())
}

impl<T: Scalar> MatrixEmbedding<T> {
    /// Wraps a buffer that is already unit Frobenius norm.
    pub fn new(data: Vec<T>, p: usize, r: usize) -> Result<Self> {
        check_shape(&data, p, r)?;
        let norm = frobenius_norm(&data);
        let dev = (norm - T::one()).abs();
        if dev > T::unit_tol() {
            return Err(Error::NotUnitNorm {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
                tolerance: T::unit_tol().to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(MatrixEmbedding { data, p, r })
    }

    /// Scales an arbitrary nonzero matrix onto the unit Frobenius sphere.
    ///
    /// Zero (or non-finite) input is rejected, never silently renormalized.
    pub fn normalized(mut data: Vec<T>, p: usize, r: usize) -> Result<Self> {
        check_shape(&data, p, r)?;
        let norm = frobenius_norm(&data);
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "cannot normalize matrix with Frobenius norm {norm}"
            )));
        }
        for x in &mut data {
            *x = *x / norm;
        }
        Ok(MatrixEmbedding { data, p, r })
    }

    pub(crate) fn from_raw_unchecked(data: Vec<T>, p: usize, r: usize) -> Self {
        debug_assert!((frobenius_norm(&data) - T::one()).abs() <= T::unit_tol());
        MatrixEmbedding { data, p, r }
    }

    /// Constructor for values deserialized from embedding files, which may
    /// carry rounding from storage (e.g. 32-bit floats read back at higher
    /// precision). The file reader has already enforced the format's own
    /// norm limits; values are kept exactly as stored.
    pub(crate) fn from_stored(data: Vec<T>, p: usize, r: usize) -> Self {
        MatrixEmbedding { data, p, r }
    }

    /// Bypasses the unit-norm check so tests can probe formulas at perturbed
    /// (off-sphere) points, e.g. for finite differences.
    #[cfg(test)]
    pub(crate) fn from_raw_for_test(data: Vec<T>, p: usize, r: usize) -> Self {
        MatrixEmbedding { data, p, r }
    }

    pub fn rows(&self) -> usize {
        self.p
    }

    pub fn cols(&self) -> usize {
        self.r
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.r + j]
    }

    /// Reinterprets the row-major buffer as a unit vector of length `p * r`.
    pub fn flatten(self) -> FlatEmbedding<T> {
        FlatEmbedding {
            data: self.data,
            p: self.p,
            r: self.r,
        }
    }
}

impl<T: Scalar> FlatEmbedding<T> {
    pub fn new(data: Vec<T>, p: usize, r: usize) -> Result<Self> {
        Ok(MatrixEmbedding::new(data, p, r)?.flatten())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.p, self.r)
    }

    /// Restores the matrix view. Exact inverse of [`MatrixEmbedding::flatten`].
    pub fn unflatten(self) -> MatrixEmbedding<T> {
        MatrixEmbedding {
            data: self.data,
            p: self.p,
            r: self.r,
        }
    }
}

fn check_unit<T: Scalar>(x: &[T]) -> Result<()> {
    let dev = (frobenius_norm(x) - T::one()).abs();
    if dev > T::unit_tol() {
        return Err(Error::NotUnitNorm {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
            tolerance: T::unit_tol().to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Removes the radial component of an ambient vector at a point on the
/// sphere: returns `g - (x . g) x`. The result is orthogonal to `x`.
pub fn tangent_project<T: Scalar>(x: &[T], g: &[T]) -> Result<Vec<T>> {
    if x.len() != g.len() {
        return Err(Error::shape("tangent_project lengths", x.len(), g.len()));
    }
    check_unit(x)?;
    let xg = dot(x, g);
    Ok(x.iter().zip(g).map(|(&xi, &gi)| gi - xg * xi).collect())
}

/// Steps against a tangent direction and renormalizes:
/// `(x - step * v) / ||x - step * v||`.
pub fn retract<T: Scalar>(x: &[T], v: &[T], step: T) -> Result<Vec<T>> {
    if x.len() != v.len() {
        return Err(Error::shape("retract lengths", x.len(), v.len()));
    }
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "retract step must be positive and finite, got {step}"
        )));
    }
    check_unit(x)?;
    let xv = dot(x, v).abs();
    if xv > T::unit_tol() {
        return Err(Error::DegenerateInput(format!(
            "retract direction is not tangent: |x . v| = {xv}"
        )));
    }
    let mut out: Vec<T> = x.iter().zip(v).map(|(&xi, &vi)| xi - step * vi).collect();
    let norm = frobenius_norm(&out);
    // For unit x and tangent v the stepped point has norm >= 1; a near-zero
    // norm can only come from invalid inputs.
    if norm < T::c(1e-15) {
        return Err(Error::DegenerateInput(
            "retraction collapsed to the origin".into(),
        ));
    }
    let inv = T::one() / norm;
    for o in &mut out {
        *o = *o * inv;
    }
    Ok(out)
}

/// Fused project-then-retract used by the training hot path.
///
/// Mathematically identical to `retract(x, tangent_project(x, grad), step)`
/// but skips input validation: parameters read out of a shared bank may carry
/// torn updates from concurrent workers, and the renormalization at the end
/// restores the invariant regardless.
pub(crate) fn descend_in_place<T: Scalar>(x: &mut [T], grad: &[T], step: T) {
    debug_assert_eq!(x.len(), grad.len());
    let xg = dot(x, grad);
    let scale = T::one() + step * xg;
    let mut sq = T::zero();
    for (xi, &gi) in x.iter_mut().zip(grad) {
        let y = scale * *xi - step * gi;
        sq = sq + y * y;
        *xi = y;
    }
    let norm = sq.sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        // Unreachable for sane inputs; keep the old (pre-scale) point rather
        // than poison the bank.
        let inv = T::one() / scale;
        for (xi, &gi) in x.iter_mut().zip(grad) {
            *xi = (*xi + step * gi) * inv;
        }
        return;
    }
    let inv = T::one() / norm;
    for xi in x.iter_mut() {
        *xi = *xi * inv;
    }
}
