//! Comparator methods: k-means on the top-|t| features, k-means on
//! principal component scores, and nearest weighted centroid prediction.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::data::{ClusterAssignment, DataMatrix, Outcome, SparseClusteringResult};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, KMeansConfig};
use crate::supervised::{outcome_scores, top_features, FeatureScores};

/// Ordinary k-means restricted to the `m` features with the largest `|T_j|`.
pub fn semi_supervised_clustering(
    x: &DataMatrix,
    y: &Outcome,
    m: usize,
    cfg: &KMeansConfig,
) -> Result<ClusterAssignment> {
    let scores = outcome_scores(x, y)?;
    semi_supervised_from_scores(x, &scores, m, cfg)
}

pub fn semi_supervised_from_scores(
    x: &DataMatrix,
    scores: &FeatureScores,
    m: usize,
    cfg: &KMeansConfig,
) -> Result<ClusterAssignment> {
    if scores.t.len() != x.n_features() {
        return Err(Error::DimensionMismatch {
            expected: x.n_features(),
            got: scores.t.len(),
        });
    }
    let cols = top_features(scores, m)?;
    kmeans(&x.select_features(&cols)?, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EigenRoute {
    /// Eigendecomposition of the `n x n` Gram matrix of centered rows.
    Gram,
    /// Eigendecomposition of the `p x p` cross-product of centered columns.
    Covariance,
}

fn centered(x: &DataMatrix) -> DMatrix<f64> {
    let (n, p) = (x.n_obs(), x.n_features());
    let mut m = DMatrix::from_row_slice(n, p, x.as_slice());
    for mut c in m.column_iter_mut() {
        let mean = c.mean();
        c.add_scalar_mut(-mean);
    }
    m
}

fn pca_scores_via(x: &DataMatrix, n_components: usize, route: EigenRoute) -> Result<DMatrix<f64>> {
    let (n, p) = (x.n_obs(), x.n_features());
    if n_components == 0 || n_components > n.min(p) {
        return Err(Error::InvalidConfig(format!(
            "n_components = {n_components} must lie in 1..={}",
            n.min(p)
        )));
    }
    let xc = centered(x);
    let product = match route {
        EigenRoute::Gram => &xc * xc.transpose(),
        EigenRoute::Covariance => xc.transpose() * &xc,
    };
    let eig = SymmetricEigen::new(product);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let top = eig.eigenvalues[order[0]].max(0.0);
    let available = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i] > 1e-10 * top && top > 0.0)
        .count();
    if available < n_components {
        return Err(Error::RankDeficient {
            requested: n_components,
            available,
        });
    }
    let mut scores = DMatrix::zeros(n, n_components);
    for (c, &i) in order.iter().take(n_components).enumerate() {
        let v = eig.eigenvectors.column(i);
        let s = match route {
            EigenRoute::Gram => v * eig.eigenvalues[i].sqrt(),
            EigenRoute::Covariance => &xc * v,
        };
        // sign convention: the largest-magnitude score is positive
        let pivot = s
            .iter()
            .fold(0.0f64, |b, &v| if v.abs() > b.abs() { v } else { b });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        scores.set_column(c, &(s * sign));
    }
    Ok(scores)
}

/// Scores of the observations on the leading `n_components` principal
/// directions of the column-centered data.
pub fn pca_scores(x: &DataMatrix, n_components: usize) -> Result<DataMatrix> {
    let route = if x.n_obs() <= x.n_features() {
        EigenRoute::Gram
    } else {
        EigenRoute::Covariance
    };
    let s = pca_scores_via(x, n_components, route)?;
    let values: Vec<f64> = s
        .row_iter()
        .flat_map(|r| r.iter().copied().collect::<Vec<_>>())
        .collect();
    let names = (1..=n_components).map(|c| format!("PC{c}")).collect();
    DataMatrix::new(
        values,
        x.n_obs(),
        n_components,
        names,
        x.observation_ids().to_vec(),
    )
}

/// k-means on the leading principal component scores.
pub fn pca_kmeans(
    x: &DataMatrix,
    n_components: usize,
    cfg: &KMeansConfig,
) -> Result<ClusterAssignment> {
    kmeans(&pca_scores(x, n_components)?, cfg)
}

/// Assigns each row of `new_x` to the training cluster whose centroid is
/// nearest under `sum_j w_j (x_j - c_kj)^2` with the training weights.
/// Returns labels in `0..k`; a small batch need not hit every cluster.
pub fn nearest_centroid_predict(
    train_x: &DataMatrix,
    train: &SparseClusteringResult,
    new_x: &DataMatrix,
) -> Result<Vec<usize>> {
    if train_x.feature_names() != new_x.feature_names() {
        return Err(Error::FeatureMismatch(format!(
            "training data has {} features, new data {} (names must match in order)",
            train_x.n_features(),
            new_x.n_features()
        )));
    }
    if train.assignment.len() != train_x.n_obs() || train.weights.len() != train_x.n_features() {
        return Err(Error::DimensionMismatch {
            expected: train_x.n_obs(),
            got: train.assignment.len(),
        });
    }
    let support = train.weights.support();
    let w: Vec<f64> = support
        .iter()
        .map(|&j| train.weights.as_slice()[j])
        .collect();
    let k = train.assignment.k();
    let d = support.len();
    let mut centroids = vec![0.0; k * d];
    for (row, &l) in train_x.rows().zip(train.assignment.labels()) {
        for (c, &j) in support.iter().enumerate() {
            centroids[l * d + c] += row[j];
        }
    }
    for (l, &size) in train.assignment.sizes().iter().enumerate() {
        centroids[l * d..(l + 1) * d]
            .iter_mut()
            .for_each(|v| *v /= size as f64);
    }
    Ok(new_x
        .rows()
        .map(|row| {
            (0..k)
                .map(|l| {
                    let c = &centroids[l * d..(l + 1) * d];
                    support
                        .iter()
                        .enumerate()
                        .map(|(i, &j)| w[i] * (row[j] - c[i]).powi(2))
                        .sum::<f64>()
                })
                .enumerate()
                .fold((0, f64::INFINITY), |(bl, bd), (l, dist)| {
                    if dist < bd {
                        (l, dist)
                    } else {
                        (bl, bd)
                    }
                })
                .0
        })
        .collect())
}
