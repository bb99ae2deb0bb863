//! Shared data types: the observation-by-feature matrix, feature weights,
//! cluster assignments, outcomes and clustering results.
//!
//! Observations are rows and features are columns everywhere in the crate.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Dense `n x p` matrix stored row-major, with names for both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    p: usize,
    feature_names: Vec<String>,
    observation_ids: Vec<String>,
}

impl DataMatrix {
    pub fn new(
        values: Vec<f64>,
        n: usize,
        p: usize,
        feature_names: Vec<String>,
        observation_ids: Vec<String>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMatrix(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if p < 1 {
            return Err(Error::InvalidMatrix("need at least 1 feature".into()));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: values.len(),
            });
        }
        if feature_names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: feature_names.len(),
            });
        }
        if observation_ids.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: observation_ids.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value at row {}, column {}",
                pos / p,
                pos % p
            )));
        }
        let mut seen = HashSet::with_capacity(p);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidMatrix(format!(
                    "duplicate feature name {name:?}"
                )));
            }
        }
        Ok(Self {
            values,
            n,
            p,
            feature_names,
            observation_ids,
        })
    }

    /// Builds a matrix with generated names `f1..fp` and ids `o1..on`.
    pub fn from_row_major(values: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        let names = (1..=p).map(|j| format!("f{j}")).collect();
        let ids = (1..=n).map(|i| format!("o{i}")).collect();
        Self::new(values, n, p, names, ids)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(values, n, p)
    }

    pub fn n_obs(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn observation_ids(&self) -> &[String] {
        &self.observation_ids
    }

    /// Returns a new matrix with observations reordered by `order`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        let mut ids = Vec::with_capacity(order.len());
        for &i in order {
            values.extend_from_slice(self.row(i));
            ids.push(self.observation_ids[i].clone());
        }
        Self::new(values, order.len(), self.p, self.feature_names.clone(), ids)
    }

    /// Returns a new matrix restricted to (and ordered by) the given columns.
    pub fn select_features(&self, cols: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(self.n * cols.len());
        for row in self.rows() {
            values.extend(cols.iter().map(|&j| row[j]));
        }
        let names = cols
            .iter()
            .map(|&j| self.feature_names[j].clone())
            .collect();
        Self::new(
            values,
            self.n,
            cols.len(),
            names,
            self.observation_ids.clone(),
        )
    }
}

/// Nonnegative per-feature weights with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(j) = w.iter().position(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {j} is {}", w[j])));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        Ok(Self(w))
    }

    /// `1/sqrt(p)` on every feature.
    pub fn uniform(p: usize) -> Self {
        assert!(p > 0, "uniform weights need p >= 1");
        Self(vec![1.0 / (p as f64).sqrt(); p])
    }

    /// `1/sqrt(m)` on the `m` selected features, zero elsewhere.
    pub fn indicator(selected: &[bool]) -> Result<Self> {
        let m = selected.iter().filter(|&&s| s).count();
        if m == 0 {
            return Err(Error::InvalidWeights("no feature selected".into()));
        }
        let v = 1.0 / (m as f64).sqrt();
        Ok(Self(
            selected.iter().map(|&s| if s { v } else { 0.0 }).collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&x| x > 0.0).count()
    }

    /// Indices of features with positive weight.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Cluster labels in `0..k`; every cluster is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    k: usize,
    sizes: Vec<usize>,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            if l >= k {
                return Err(Error::LabelOutOfRange { label: l, k });
            }
            sizes[l] += 1;
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::DegenerateInput(format!("cluster {c} is empty")));
        }
        Ok(Self { labels, k, sizes })
    }

    /// Relabels arbitrary integer labels to `0..k` in order of first appearance.
    pub fn from_raw_labels<T: Eq + std::hash::Hash + Clone>(raw: &[T]) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let labels: Vec<usize> = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(l.clone()).or_insert(next)
            })
            .collect();
        let k = map.len();
        Self::new(labels, k)
    }

    /// Same partition with labels renumbered in order of first appearance.
    pub fn canonical(&self) -> Self {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        let mut sizes = vec![0; self.k];
        for (old, &new) in map.iter().enumerate() {
            sizes[new] = self.sizes[old];
        }
        Self {
            labels,
            k: self.k,
            sizes,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Outcome variable used to guide or evaluate clustering.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Binary(Vec<u8>),
    Survival { time: Vec<f64>, event: Vec<bool> },
}

impl Outcome {
    pub fn len(&self) -> usize {
        match self {
            Outcome::Binary(y) => y.len(),
            Outcome::Survival { time, .. } => time.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks the outcome is usable for scoring `n` observations.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: n,
            });
        }
        match self {
            Outcome::Binary(y) => {
                if let Some(v) = y.iter().find(|&&v| v > 1) {
                    return Err(Error::InvalidOutcome(format!(
                        "binary label {v} is not 0 or 1"
                    )));
                }
                let ones = y.iter().filter(|&&v| v == 1).count();
                if ones == 0 || ones == y.len() {
                    return Err(Error::SingleClassOutcome);
                }
            }
            Outcome::Survival { time, event } => {
                if event.len() != time.len() {
                    return Err(Error::LengthMismatch {
                        left: time.len(),
                        right: event.len(),
                    });
                }
                if let Some(t) = time.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
                    return Err(Error::InvalidOutcome(format!(
                        "survival time {t} is not positive"
                    )));
                }
                if !event.iter().any(|&e| e) {
                    return Err(Error::NoEvents);
                }
            }
        }
        Ok(())
    }
}

/// Converged state of the sparse clustering loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseClusteringResult {
    pub weights: WeightVector,
    pub assignment: ClusterAssignment,
    /// Weighted between-cluster sum of squares of `assignment` under `weights`.
    pub objective: f64,
    pub iterations: usize,
    /// Relative L1 weight change after each outer iteration.
    pub weight_change_trace: Vec<f64>,
    pub converged: bool,
}

/// Per-feature centering and scaling fitted on one matrix, reusable on
/// another with the same features.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub feature_names: Vec<String>,
    pub mean: Vec<f64>,
    /// Sample standard deviations (`n - 1` denominator).
    pub sd: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &DataMatrix) -> Result<Self> {
        let (n, p) = (x.n, x.p);
        let mut mean = vec![0.0; p];
        for row in x.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut ss = vec![0.0; p];
        for row in x.rows() {
            for j in 0..p {
                let d = row[j] - mean[j];
                ss[j] += d * d;
            }
        }
        let mut sd = Vec::with_capacity(p);
        for (j, s) in ss.iter().enumerate() {
            let v = (s / (n - 1) as f64).sqrt();
            // relative to the column's magnitude, so rounding noise on a
            // constant column still counts as zero variance
            let scale = mean[j].abs().max(1.0);
            if !(v > 1e-12 * scale) {
                return Err(Error::ZeroVarianceFeature {
                    index: j,
                    name: x.feature_names[j].clone(),
                });
            }
            sd.push(v);
        }
        Ok(Self {
            feature_names: x.feature_names.clone(),
            mean,
            sd,
        })
    }

    pub fn apply(&self, x: &DataMatrix) -> Result<DataMatrix> {
        if x.feature_names != self.feature_names {
            return Err(Error::FeatureMismatch(format!(
                "fitted on {} features, applied to {} (names must match in order)",
                self.feature_names.len(),
                x.p
            )));
        }
        let values = x
            .rows()
            .flat_map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| (v - self.mean[j]) / self.sd[j])
                    .collect::<Vec<_>>()
            })
            .collect();
        DataMatrix::new(
            values,
            x.n,
            x.p,
            x.feature_names.clone(),
            x.observation_ids.clone(),
        )
    }
}

/// Centers every column to mean 0 and scales to sample standard deviation 1
/// (denominator `n - 1`).
pub fn standardize_features(x: &DataMatrix) -> Result<DataMatrix> {
    Standardization::fit(x)?.apply(x)
}
