//! Between-cluster sums of squares and k-means under per-feature weights.
//!
//! Weighted k-means is solved by running Lloyd's algorithm on the matrix
//! with column `j` scaled by `sqrt(w_j)`: squared Euclidean distance there
//! equals `sum_j w_j (x_ij - x_i'j)^2`. Zero-weight columns are dropped
//! before clustering.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::data::{ClusterAssignment, DataMatrix, WeightVector};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Relative within-cluster sum of squares change that ends a Lloyd run.
    pub tolerance: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 20,
            max_iterations: 100,
            tolerance: 1e-6,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if self.k > n {
            return Err(Error::InvalidConfig(format!(
                "k = {} exceeds n = {n}",
                self.k
            )));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "restarts and max_iterations must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Per-feature between-cluster sum of squares as it appears in the sparse
/// clustering objective:
///
/// `a_j = (1/n) sum_{i,i'} d_ii'j - sum_k (1/n_k) sum_{i,i' in C_k} d_ii'j`
///
/// with `d_ii'j = (x_ij - x_i'j)^2` summed over ordered pairs. That double
/// sum reduces to `2 * sum_k n_k (mean_kj - mean_j)^2`, which is what is
/// computed here.
pub fn per_feature_bcss(x: &DataMatrix, clusters: &ClusterAssignment) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..x.n_features()).collect();
    bcss_for(x, clusters, &all)
}

fn bcss_for(x: &DataMatrix, clusters: &ClusterAssignment, cols: &[usize]) -> Result<Vec<f64>> {
    let n = x.n_obs();
    if clusters.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: clusters.len(),
        });
    }
    let k = clusters.k();
    let d = cols.len();
    let mut sums = vec![0.0; k * d];
    let mut total = vec![0.0; d];
    for (row, &l) in x.rows().zip(clusters.labels()) {
        let acc = &mut sums[l * d..(l + 1) * d];
        for (c, &j) in cols.iter().enumerate() {
            acc[c] += row[j];
            total[c] += row[j];
        }
    }
    let mut out = vec![0.0; d];
    for (c, o) in out.iter_mut().enumerate() {
        let grand = total[c] / n as f64;
        *o = 2.0
            * clusters
                .sizes()
                .iter()
                .enumerate()
                .map(|(l, &nk)| {
                    let diff = sums[l * d + c] / nk as f64 - grand;
                    nk as f64 * diff * diff
                })
                .sum::<f64>();
    }
    Ok(out)
}

/// `sum_j w_j a_j` for the between-cluster sums of squares `a`.
pub fn weighted_objective(
    x: &DataMatrix,
    w: &WeightVector,
    clusters: &ClusterAssignment,
) -> Result<f64> {
    if w.len() != x.n_features() {
        return Err(Error::DimensionMismatch {
            expected: x.n_features(),
            got: w.len(),
        });
    }
    let support = w.support();
    let a = bcss_for(x, clusters, &support)?;
    Ok(support
        .iter()
        .zip(&a)
        .map(|(&j, aj)| w.as_slice()[j] * aj)
        .sum())
}

/// One Lloyd run: final labels and the within-cluster sum of squares after
/// each iteration.
struct LloydRun {
    labels: Vec<usize>,
    wss_trace: Vec<f64>,
}

/// Outcome of best-of-restarts k-means.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub assignment: ClusterAssignment,
    pub objective: f64,
    pub restart_objectives: Vec<f64>,
    pub restart_traces: Vec<Vec<f64>>,
}

/// Row-major `n x d` matrix of the weighted, support-restricted features.
struct Scaled {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Scaled {
    fn new(x: &DataMatrix, w: &WeightVector) -> Self {
        let support = w.support();
        let root: Vec<f64> = support.iter().map(|&j| w.as_slice()[j].sqrt()).collect();
        let mut data = Vec::with_capacity(x.n_obs() * support.len());
        for row in x.rows() {
            data.extend(support.iter().zip(&root).map(|(&j, r)| row[j] * r));
        }
        Self {
            data,
            n: x.n_obs(),
            d: support.len(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    fn distinct_rows_at_least(&self, k: usize) -> bool {
        let mut seen = HashSet::new();
        for i in 0..self.n {
            let key: Vec<u64> = self.row(i).iter().map(|v| (v + 0.0).to_bits()).collect();
            seen.insert(key);
            if seen.len() >= k {
                return true;
            }
        }
        false
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_pp(m: &Scaled, k: usize, stream: &mut Stream) -> Vec<f64> {
    let d = m.d;
    let mut centroids = Vec::with_capacity(k * d);
    let first = stream.below(m.n);
    centroids.extend_from_slice(m.row(first));
    let mut nearest: Vec<f64> = (0..m.n).map(|i| sq_dist(m.row(i), m.row(first))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = stream.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &dist) in nearest.iter().enumerate() {
                acc += dist;
                if dist > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just past the last positive mass
            pick.unwrap_or_else(|| nearest.iter().rposition(|&v| v > 0.0).unwrap_or(0))
        } else {
            stream.below(m.n)
        };
        centroids.extend_from_slice(m.row(pick));
        let new_c = &centroids[c * d..(c + 1) * d];
        for (i, best) in nearest.iter_mut().enumerate() {
            let dist = sq_dist(m.row(i), new_c);
            if dist < *best {
                *best = dist;
            }
        }
    }
    centroids
}

fn centroids_of(m: &Scaled, labels: &[usize], k: usize) -> Vec<f64> {
    let d = m.d;
    let mut c = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (acc, v) in c[l * d..(l + 1) * d].iter_mut().zip(m.row(i)) {
            *acc += v;
        }
    }
    for (l, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            c[l * d..(l + 1) * d]
                .iter_mut()
                .for_each(|v| *v /= cnt as f64);
        }
    }
    c
}

/// Nearest-centroid labels (ties go to the lowest index), then any empty
/// cluster takes the point farthest from its own centroid.
fn assign(m: &Scaled, centroids: &[f64], k: usize, labels: &mut [usize]) {
    let d = m.d;
    let mut dist_own = vec![0.0; m.n];
    let mut counts = vec![0usize; k];
    for i in 0..m.n {
        let row = m.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let dist = sq_dist(row, &centroids[c * d..(c + 1) * d]);
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        labels[i] = best;
        dist_own[i] = best_d;
        counts[best] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let donor = (0..m.n)
            .filter(|&i| counts[labels[i]] > 1)
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(b) if dist_own[b] >= dist_own[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n guarantees a donor");
        counts[labels[donor]] -= 1;
        labels[donor] = empty;
        counts[empty] = 1;
        dist_own[donor] = 0.0;
    }
}

fn wss(m: &Scaled, labels: &[usize], centroids: &[f64]) -> f64 {
    let d = m.d;
    (0..m.n)
        .map(|i| sq_dist(m.row(i), &centroids[labels[i] * d..(labels[i] + 1) * d]))
        .sum()
}

fn lloyd(
    m: &Scaled,
    k: usize,
    mut centroids: Vec<f64>,
    max_iterations: usize,
    tol: f64,
) -> LloydRun {
    let mut labels = vec![0usize; m.n];
    assign(m, &centroids, k, &mut labels);
    centroids = centroids_of(m, &labels, k);
    let mut trace = vec![wss(m, &labels, &centroids)];
    let mut next = labels.clone();
    for _ in 1..max_iterations {
        assign(m, &centroids, k, &mut next);
        if next == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next);
        centroids = centroids_of(m, &labels, k);
        let cur = wss(m, &labels, &centroids);
        let prev = *trace.last().unwrap();
        trace.push(cur);
        if prev <= 0.0 || (prev - cur) / prev < tol {
            break;
        }
    }
    LloydRun {
        labels,
        wss_trace: trace,
    }
}

/// Best-of-restarts weighted k-means with full diagnostics.
///
/// Restart `r` draws from the stream derived from `(cfg.seed, r)`. When
/// `warm` is given, one extra run starts from its cluster centroids.
pub fn weighted_kmeans_fit(
    x: &DataMatrix,
    w: &WeightVector,
    cfg: &KMeansConfig,
    warm: Option<&ClusterAssignment>,
) -> Result<KMeansFit> {
    cfg.validate(x.n_obs())?;
    if w.len() != x.n_features() {
        return Err(Error::DimensionMismatch {
            expected: x.n_features(),
            got: w.len(),
        });
    }
    let m = Scaled::new(x, w);
    if !m.distinct_rows_at_least(cfg.k) {
        return Err(Error::DegenerateInput(format!(
            "fewer than k = {} distinct observations under the current weights",
            cfg.k
        )));
    }
    if let Some(init) = warm {
        if init.len() != x.n_obs() || init.k() != cfg.k {
            return Err(Error::DimensionMismatch {
                expected: x.n_obs(),
                got: init.len(),
            });
        }
    }
    let runs: Vec<(ClusterAssignment, f64, Vec<f64>)> = (0..cfg.restarts
        + usize::from(warm.is_some()))
        .into_par_iter()
        .map(|r| {
            let init = match warm {
                Some(a) if r == cfg.restarts => centroids_of(&m, a.labels(), cfg.k),
                _ => kmeans_pp(&m, cfg.k, &mut Stream::derived(cfg.seed, &[r as u64])),
            };
            let run = lloyd(&m, cfg.k, init, cfg.max_iterations, cfg.tolerance);
            let assignment = ClusterAssignment::new(run.labels, cfg.k)?.canonical();
            let obj = weighted_objective(x, w, &assignment)?;
            Ok((assignment, obj, run.wss_trace))
        })
        .collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (r, run)| if run.1 > runs[b].1 { r } else { b });
    Ok(KMeansFit {
        assignment: runs[best].0.clone(),
        objective: runs[best].1,
        restart_objectives: runs.iter().map(|r| r.1).collect(),
        restart_traces: runs.into_iter().map(|r| r.2).collect(),
    })
}

/// Clusters the rows of `x` to maximize the weighted between-cluster sum of
/// squares for fixed weights `w`.
pub fn weighted_kmeans(
    x: &DataMatrix,
    w: &WeightVector,
    cfg: &KMeansConfig,
) -> Result<ClusterAssignment> {
    weighted_kmeans_fit(x, w, cfg, None).map(|f| f.assignment)
}

/// Ordinary k-means with restarts (all features weighted equally).
pub fn kmeans(x: &DataMatrix, cfg: &KMeansConfig) -> Result<ClusterAssignment> {
    let ones = WeightVector::new(vec![1.0; x.n_features()])?;
    weighted_kmeans(x, &ones, cfg)
}
