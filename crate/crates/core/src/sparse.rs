//! Sparse k-means: alternate weighted k-means over the clusters with an
//! L1/L2-constrained update of the feature weights.

use crate::data::{DataMatrix, SparseClusteringResult, WeightVector};
use crate::error::{Error, Result};
use crate::kmeans::{per_feature_bcss, weighted_kmeans_fit, weighted_objective, KMeansConfig};
use crate::rng::derive_seed;

/// L1 tolerance of the bisection on the soft-threshold level.
pub const L1_TOLERANCE: f64 = 1e-6;
const MAX_BISECTIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseConfig {
    pub k: usize,
    /// L1 bound on the weights, in `(1, sqrt(p)]`.
    pub s: f64,
    pub kmeans: KMeansConfig,
    pub max_outer_iterations: usize,
    pub weight_tolerance: f64,
    /// Seed each k-means step with an extra run started from the previous
    /// assignment's centroids.
    pub warm_start: bool,
}

impl SparseConfig {
    /// Defaults for `p` features: `s = sqrt(p)/2` (or `sqrt(p)` when that
    /// would not exceed 1), 15 outer iterations, tolerance 1e-4.
    pub fn new(k: usize, p: usize) -> Self {
        Self {
            k,
            s: default_s(p),
            kmeans: KMeansConfig::new(k),
            max_outer_iterations: 15,
            weight_tolerance: 1e-4,
            warm_start: false,
        }
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.kmeans.seed = seed;
        self
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        let root = (p as f64).sqrt();
        let lower_ok = if p == 1 { self.s >= 1.0 } else { self.s > 1.0 };
        if !(lower_ok && self.s <= root + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "s = {} must lie in (1, sqrt(p) = {root:.4}]",
                self.s
            )));
        }
        if self.k != self.kmeans.k {
            return Err(Error::InvalidConfig(format!(
                "k = {} but kmeans.k = {}",
                self.k, self.kmeans.k
            )));
        }
        if self.max_outer_iterations == 0 || !(self.weight_tolerance > 0.0) {
            return Err(Error::InvalidConfig(
                "outer iteration cap and weight tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_s(p: usize) -> f64 {
    let root = (p as f64).sqrt();
    if root / 2.0 > 1.0 {
        root / 2.0
    } else {
        root
    }
}

/// `max(max(a_j, 0) - delta, 0)` coordinate-wise.
pub fn soft_threshold(a: &[f64], delta: f64) -> Vec<f64> {
    a.iter().map(|&v| (v.max(0.0) - delta).max(0.0)).collect()
}

fn normalized(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0).then(|| v.into_iter().map(|x| x / norm).collect())
}

/// Maximizes `sum_j w_j a_j` subject to `||w||_2 = 1`, `||w||_1 <= s`,
/// `w >= 0`.
///
/// The maximizer is `S(a+, delta) / ||S(a+, delta)||_2`; `delta` is zero if
/// that already satisfies the L1 bound and is otherwise found by bisection
/// so that the L1 norm equals `s`.
pub fn update_weights(a: &[f64], s: f64) -> Result<WeightVector> {
    let max_a = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max_a > 0.0) {
        return Err(Error::NoPositiveBcss);
    }
    let unconstrained = normalized(soft_threshold(a, 0.0)).expect("positive entry");
    if unconstrained.iter().sum::<f64>() <= s {
        return WeightVector::new(unconstrained);
    }
    let (mut lo, mut hi) = (0.0, max_a);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        match normalized(soft_threshold(a, mid)) {
            None => hi = mid,
            Some(w) => {
                let l1: f64 = w.iter().sum();
                if (l1 - s).abs() < L1_TOLERANCE {
                    return WeightVector::new(w);
                }
                if l1 > s {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    // only reachable when ties at the maximum keep the L1 norm above s
    let w = normalized(soft_threshold(a, hi))
        .or_else(|| normalized(soft_threshold(a, lo)))
        .expect("lo keeps a positive entry");
    WeightVector::new(w)
}

/// Sparse k-means from the initial weights `w0` (uniform `1/sqrt(p)` when
/// `None`).
pub fn sparse_kmeans(
    x: &DataMatrix,
    cfg: &SparseConfig,
    w0: Option<&WeightVector>,
) -> Result<SparseClusteringResult> {
    sparse_kmeans_masked(x, cfg, w0, None)
}

/// Sparse k-means where features with `allowed[j] == false` have their
/// between-cluster sum of squares forced to zero before every weight
/// update, so they can never regain weight.
pub(crate) fn sparse_kmeans_masked(
    x: &DataMatrix,
    cfg: &SparseConfig,
    w0: Option<&WeightVector>,
    allowed: Option<&[bool]>,
) -> Result<SparseClusteringResult> {
    let p = x.n_features();
    cfg.validate(p)?;
    let mut w = match w0 {
        Some(w) if w.len() != p => {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: w.len(),
            })
        }
        Some(w) => w.clone(),
        None => WeightVector::uniform(p),
    };
    let mut trace = Vec::new();
    let mut previous = None;
    let mut converged = false;
    let mut assignment = None;
    for outer in 1..=cfg.max_outer_iterations {
        let mut km = cfg.kmeans.clone();
        km.seed = derive_seed(cfg.kmeans.seed, &[outer as u64]);
        let warm = if cfg.warm_start {
            previous.as_ref()
        } else {
            None
        };
        let clusters = weighted_kmeans_fit(x, &w, &km, warm)?.assignment;
        let mut a = per_feature_bcss(x, &clusters)?;
        if let Some(mask) = allowed {
            for (aj, &ok) in a.iter_mut().zip(mask) {
                if !ok {
                    *aj = 0.0;
                }
            }
        }
        let w_new = update_weights(&a, cfg.s)?;
        let change = w_new
            .as_slice()
            .iter()
            .zip(w.as_slice())
            .map(|(n, o)| (n - o).abs())
            .sum::<f64>()
            / w.l1_norm();
        trace.push(change);
        w = w_new;
        previous = Some(clusters.clone());
        assignment = Some(clusters);
        if change < cfg.weight_tolerance {
            converged = true;
            break;
        }
    }
    let assignment = assignment.expect("at least one outer iteration");
    let objective = weighted_objective(x, &w, &assignment)?;
    Ok(SparseClusteringResult {
        weights: w,
        assignment,
        objective,
        iterations: trace.len(),
        weight_change_trace: trace,
        converged,
    })
}
