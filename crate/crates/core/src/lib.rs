//! Joint word and document embeddings as matrices with unit Frobenius norm.
//!
//! Every word is a `p x r1` matrix and every document a `p x r2` matrix
//! constrained to the unit Frobenius sphere; similarity between two matrices
//! is the mean dot product over all pairs of their columns, which reduces to
//! cosine similarity when both have a single column. Training maximizes a
//! hinge margin between observed (context, center, document) tuples and
//! negative-sampled ones, taking Riemannian gradient steps on the sphere the
//! matrices flatten onto.
//!
//! The crate is generic over the scalar type (`f32` or `f64`, see
//! [`Scalar`]); the `*64`/`*32` aliases below pick concrete instantiations.
//!
//! Modules:
//! - [`manifold`]: unit-norm matrix type, flattening, tangent projection,
//!   retraction.
//! - [`similarity`]: the pairwise-column metric, its gradient, the squared
//!   distance, and the affinity kernel.
//! - [`corpus`]: tokenization, vocabulary, subsampling, context windows,
//!   negative-sampling table.
//! - [`trainer`]: the max-margin loss, analytic gradients, and the
//!   (optionally hogwild-parallel) training loop.
//! - [`eval`]: spectral clustering with MI/NMI/ARI/purity, k-NN
//!   classification with macro/micro F1, and STS Pearson evaluation.
//! - [`io`]: embedding file formats (text and binary) and run manifests.

// `!(x > 0.0)`-style guards are deliberate: they treat NaN as failing,
// which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod eval;
pub mod io;
pub mod manifold;
pub mod scalar;
pub mod similarity;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision matrix embedding (the default for training and
/// evaluation).
pub type MatrixEmbedding64 = manifold::MatrixEmbedding<f64>;
/// Single-precision matrix embedding, matching the binary file format.
pub type MatrixEmbedding32 = manifold::MatrixEmbedding<f32>;

pub type FlatEmbedding64 = manifold::FlatEmbedding<f64>;
pub type FlatEmbedding32 = manifold::FlatEmbedding<f32>;

pub type ModelParams64 = trainer::ModelParams<f64>;
pub type ModelParams32 = trainer::ModelParams<f32>;
