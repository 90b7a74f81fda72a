//! Scalar abstraction: all embedding math is generic over `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar backing embeddings, gradients, and metrics.
///
/// Tolerances scale with the type: the `f64` values are the reference
/// contracts, the `f32` values are widened to sit above its rounding noise.
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lock-free cell used by shared parameter banks during training.
    type Cell: ScalarCell<Self>;

    /// Tolerance for unit-norm checks on inputs (absorbs drift accumulated
    /// over many retractions).
    fn unit_tol() -> Self;

    /// Tolerance for freshly computed outputs (orthogonality after a
    /// projection, norm after a retraction).
    fn fresh_tol() -> Self;

    /// Shorthand for converting literal constants.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }
}

impl Scalar for f32 {
    type Cell = CellF32;

    #[inline]
    fn unit_tol() -> Self {
        1e-3
    }

    #[inline]
    fn fresh_tol() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    type Cell = CellF64;

    #[inline]
    fn unit_tol() -> Self {
        1e-9
    }

    #[inline]
    fn fresh_tol() -> Self {
        1e-12
    }
}

/// A shareable scalar slot with relaxed atomic load/store semantics.
///
/// Asynchronous (hogwild-style) training updates parameters from several
/// workers without mutual exclusion; lost updates are tolerated by contract.
/// Going through atomics keeps those races well-defined without costing
/// anything on mainstream targets.
pub trait ScalarCell<T>: Send + Sync {
    fn new(value: T) -> Self;
    fn load(&self) -> T;
    fn store(&self, value: T);
}

pub struct CellF32(AtomicU32);

impl ScalarCell<f32> for CellF32 {
    #[inline]
    fn new(value: f32) -> Self {
        CellF32(AtomicU32::new(value.to_bits()))
    }

    #[inline]
    fn load(&self) -> f32 {
        f32::from_bits(self.0.load(Ordering::Relaxed))
    }

    #[inline]
    fn store(&self, value: f32) {
        self.0.store(value.to_bits(), Ordering::Relaxed);
    }
}

pub struct CellF64(AtomicU64);

impl ScalarCell<f64> for CellF64 {
    #[inline]
    fn new(value: f64) -> Self {
        CellF64(AtomicU64::new(value.to_bits()))
    }

    #[inline]
    fn load(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    #[inline]
    fn store(&self, value: f64) {
        self.0.store(value.to_bits(), Ordering::Relaxed);
    }
}
