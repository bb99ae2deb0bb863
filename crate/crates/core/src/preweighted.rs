//! Preweighted sparse clustering.
//!
//! After a layer of sparse clustering, every feature whose mean differs
//! significantly across that layer's clusters (one-way ANOVA, `p < alpha`)
//! is given weight zero and sparse clustering resumes from the cluster
//! update with weight `1/sqrt(m)` on the `m` surviving features. Repeating
//! this exposes secondary, tertiary, ... cluster structure that the
//! dominant features would otherwise hide.

use crate::data::{ClusterAssignment, DataMatrix, SparseClusteringResult, WeightVector};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sparse::{sparse_kmeans, sparse_kmeans_masked, SparseConfig};
use crate::stats::f_upper_tail;

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaResult {
    /// F statistics; `f64::INFINITY` when the within-cluster variance is zero.
    pub f: Vec<f64>,
    pub pvalue: Vec<f64>,
    pub df1: usize,
    pub df2: usize,
}

/// One-way ANOVA of every feature against the cluster labels.
pub fn feature_anova(x: &DataMatrix, clusters: &ClusterAssignment) -> Result<AnovaResult> {
    let (n, p, k) = (x.n_obs(), x.n_features(), clusters.k());
    if clusters.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: clusters.len(),
        });
    }
    if k < 2 || n <= k {
        return Err(Error::DegenerateGroups(format!(
            "need 2 <= k < n, got k = {k}, n = {n}"
        )));
    }
    let mut sums = vec![0.0; k * p];
    for (row, &l) in x.rows().zip(clusters.labels()) {
        for (acc, v) in sums[l * p..(l + 1) * p].iter_mut().zip(row) {
            *acc += v;
        }
    }
    let sizes = clusters.sizes();
    let mut means = sums;
    for (l, &nk) in sizes.iter().enumerate() {
        means[l * p..(l + 1) * p]
            .iter_mut()
            .for_each(|v| *v /= nk as f64);
    }
    let grand: Vec<f64> = (0..p)
        .map(|j| {
            (0..k)
                .map(|l| means[l * p + j] * sizes[l] as f64)
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let mut wss = vec![0.0; p];
    for (row, &l) in x.rows().zip(clusters.labels()) {
        for j in 0..p {
            let d = row[j] - means[l * p + j];
            wss[j] += d * d;
        }
    }
    let (df1, df2) = (k - 1, n - k);
    let mut f = Vec::with_capacity(p);
    let mut pvalue = Vec::with_capacity(p);
    for j in 0..p {
        let bss: f64 = (0..k)
            .map(|l| sizes[l] as f64 * (means[l * p + j] - grand[j]).powi(2))
            .sum();
        let scale = grand[j] * grand[j] * n as f64;
        let fj = if bss <= 1e-24 * scale.max(1.0) {
            0.0
        } else if wss[j] <= 1e-13 * bss {
            f64::INFINITY
        } else {
            (bss / df1 as f64) / (wss[j] / df2 as f64)
        };
        f.push(fj);
        pvalue.push(f_upper_tail(fj, df1, df2));
    }
    Ok(AnovaResult {
        f,
        pvalue,
        df1,
        df2,
    })
}

fn survivors(pvalue: &[f64], alpha: f64) -> Vec<bool> {
    pvalue.iter().map(|&pv| pv >= alpha).collect()
}

/// `1/sqrt(m)` on the `m` features with `p_j >= alpha`, zero elsewhere.
pub fn preweight_mask(anova: &AnovaResult, alpha: f64) -> Result<WeightVector> {
    WeightVector::indicator(&survivors(&anova.pvalue, alpha))
        .map_err(|_| Error::AllFeaturesScreened { layer: 2, alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskMode {
    /// Screened features keep weight zero for the whole layer.
    #[default]
    Hard,
    /// Screened features only start at zero; later weight updates may
    /// revive them.
    InitOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Screening {
    /// Screen against the clusters of every shallower layer (union).
    #[default]
    Cumulative,
    /// Screen only against the immediately preceding layer.
    PreviousLayer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreweightOptions {
    /// Significance threshold; `None` means `0.05 / p`.
    pub alpha: Option<f64>,
    /// Number of layers, at least 2.
    pub depth: usize,
    pub mask_mode: MaskMode,
    pub screening: Screening,
}

impl Default for PreweightOptions {
    fn default() -> Self {
        Self {
            alpha: None,
            depth: 2,
            mask_mode: MaskMode::Hard,
            screening: Screening::Cumulative,
        }
    }
}

impl PreweightOptions {
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredResult {
    /// Primary, secondary, tertiary, ...
    pub layers: Vec<SparseClusteringResult>,
    /// Per layer, the features allowed to carry weight.
    pub masks: Vec<Vec<bool>>,
    pub alpha: f64,
    /// Per layer, how many allowed features differ significantly across
    /// that layer's own clusters. Zero flags a layer with no real structure.
    pub significant_features: Vec<usize>,
}

/// Runs `opts.depth` layers of preweighted sparse clustering.
pub fn preweighted_sparse_clustering(
    x: &DataMatrix,
    cfg: &SparseConfig,
    opts: &PreweightOptions,
) -> Result<LayeredResult> {
    let p = x.n_features();
    if opts.depth < 2 {
        return Err(Error::InvalidConfig("depth must be at least 2".into()));
    }
    let alpha = opts.alpha.unwrap_or(0.05 / p as f64);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    let mut allowed = vec![true; p];
    let mut layers = vec![sparse_kmeans(x, cfg, None)?];
    let mut masks = vec![allowed.clone()];
    let mut significant = Vec::with_capacity(opts.depth);
    for layer in 2..=opts.depth {
        let anova = feature_anova(x, &layers.last().expect("non-empty").assignment)?;
        let keep = survivors(&anova.pvalue, alpha);
        significant.push(count_significant(&keep, masks.last().expect("non-empty")));
        allowed = match opts.screening {
            Screening::Cumulative => allowed.iter().zip(&keep).map(|(&a, &k)| a && k).collect(),
            Screening::PreviousLayer => keep,
        };
        let w0 = WeightVector::indicator(&allowed)
            .map_err(|_| Error::AllFeaturesScreened { layer, alpha })?;
        let mut layer_cfg = cfg.clone();
        layer_cfg.kmeans.seed = derive_seed(cfg.kmeans.seed, &[0x1a7e, layer as u64]);
        let mask = match opts.mask_mode {
            MaskMode::Hard => Some(allowed.as_slice()),
            MaskMode::InitOnly => None,
        };
        let result = sparse_kmeans_masked(x, &layer_cfg, Some(&w0), mask).map_err(|e| match e {
            Error::NoPositiveBcss => Error::AllFeaturesScreened { layer, alpha },
            other => other,
        })?;
        layers.push(result);
        masks.push(allowed.clone());
    }
    let last = feature_anova(x, &layers.last().expect("non-empty").assignment)?;
    significant.push(count_significant(
        &survivors(&last.pvalue, alpha),
        masks.last().expect("non-empty"),
    ));
    Ok(LayeredResult {
        layers,
        masks,
        alpha,
        significant_features: significant,
    })
}

fn count_significant(keep: &[bool], allowed: &[bool]) -> usize {
    keep.iter().zip(allowed).filter(|&(&k, &a)| a && !k).count()
}
