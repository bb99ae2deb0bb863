//! Sparse k-means clustering and its outcome-guided variants.
//!
//! * [`sparse`]: sparse k-means with an L1/L2-constrained feature weight
//!   vector.
//! * [`preweighted`]: layered clustering that screens out the features
//!   explaining earlier layers to uncover secondary structure.
//! * [`supervised`]: sparse k-means started from outcome-associated features.
//! * [`baselines`]: top-|t| k-means, PCA k-means, centroid prediction.
//! * [`stats`]: the distribution tails and tests the methods rely on.
//! * [`simgen`]: seeded simulation designs and scenario sweeps.

pub mod baselines;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod kmeans;
pub mod preweighted;
pub mod rng;
pub mod simgen;
pub mod sparse;
pub mod stats;
pub mod supervised;

pub use data::{
    standardize_features, ClusterAssignment, DataMatrix, Outcome, SparseClusteringResult,
    Standardization, WeightVector,
};
pub use error::{Error, Result};
pub use kmeans::{kmeans, per_feature_bcss, weighted_kmeans, weighted_objective, KMeansConfig};
pub use preweighted::{preweighted_sparse_clustering, LayeredResult, PreweightOptions};
pub use sparse::{sparse_kmeans, update_weights, SparseConfig};
pub use supervised::{supervised_sparse_clustering, FeatureScores};
