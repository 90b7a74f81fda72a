//! Evaluation harness: spectral clustering with external quality measures,
//! k-NN classification with macro/micro F1, and STS Pearson correlation.

mod contingency;
mod kmeans;
mod knn;
mod sampling;
mod scores;
mod spectral;
mod sts;

pub use contingency::{adjusted_rand_index, mutual_info, nmi, purity, ContingencyTable, NmiNorm};
pub use kmeans::{kmeans as kmeans_cluster, KMeansOptions};
pub use knn::knn_classify;
pub use sampling::stratified_subsample;
pub use scores::{f1_scores, pearson};
pub use spectral::{affinity_matrix, spectral_cluster, spectral_cluster_affinity, SpectralOptions};
pub use sts::{sts_evaluate, StsData, StsPair, StsSplit};
