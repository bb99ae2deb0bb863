//! Supervised sparse clustering: the initial weights go to the features
//! most associated with an outcome, then ordinary sparse iterations run.

use rayon::prelude::*;

use crate::data::{DataMatrix, Outcome, SparseClusteringResult, WeightVector};
use crate::error::{Error, Result};
use crate::sparse::{sparse_kmeans, SparseConfig};
use crate::stats::cox_univariate_score;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    WelchT,
    PooledT,
    CoxScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScores {
    pub t: Vec<f64>,
    pub kind: ScoreKind,
}

/// Two-sample t statistic (group 1 minus group 0). Zero-variance features
/// score 0; a perfect split with zero within-group variance scores
/// `±f64::MAX` so it still ranks first.
fn two_sample_t(values: &[f64], y: &[u8], pooled: bool) -> f64 {
    let mut n = [0.0f64; 2];
    let mut sum = [0.0f64; 2];
    for (&v, &g) in values.iter().zip(y) {
        n[g as usize] += 1.0;
        sum[g as usize] += v;
    }
    let mean = [sum[0] / n[0], sum[1] / n[1]];
    let mut ss = [0.0f64; 2];
    for (&v, &g) in values.iter().zip(y) {
        ss[g as usize] += (v - mean[g as usize]).powi(2);
    }
    let diff = mean[1] - mean[0];
    let var = |g: usize| {
        if n[g] > 1.0 {
            ss[g] / (n[g] - 1.0)
        } else {
            0.0
        }
    };
    let se2 = if pooled {
        let df = n[0] + n[1] - 2.0;
        let s2 = if df > 0.0 { (ss[0] + ss[1]) / df } else { 0.0 };
        s2 * (1.0 / n[0] + 1.0 / n[1])
    } else {
        var(0) / n[0] + var(1) / n[1]
    };
    let scale = mean[0].abs().max(mean[1].abs()).max(1.0);
    if diff.abs() <= 1e-14 * scale {
        0.0
    } else if se2 <= 0.0 {
        f64::MAX.copysign(diff)
    } else {
        diff / se2.sqrt()
    }
}

fn scores_with(x: &DataMatrix, y: &Outcome, pooled: bool) -> Result<FeatureScores> {
    y.validate(x.n_obs())?;
    let columns: Vec<Vec<f64>> = (0..x.n_features()).map(|j| x.column(j)).collect();
    match y {
        Outcome::Binary(labels) => Ok(FeatureScores {
            t: columns
                .par_iter()
                .map(|c| two_sample_t(c, labels, pooled))
                .collect(),
            kind: if pooled {
                ScoreKind::PooledT
            } else {
                ScoreKind::WelchT
            },
        }),
        Outcome::Survival { time, event } => Ok(FeatureScores {
            t: columns
                .par_iter()
                .map(|c| cox_univariate_score(c, time, event))
                .collect::<Result<_>>()?,
            kind: ScoreKind::CoxScore,
        }),
    }
}

/// Welch t-statistics for a binary outcome, univariate Cox scores for a
/// survival outcome.
pub fn outcome_scores(x: &DataMatrix, y: &Outcome) -> Result<FeatureScores> {
    scores_with(x, y, false)
}

/// Like [`outcome_scores`] but with the pooled-variance t for binary outcomes.
pub fn outcome_scores_pooled(x: &DataMatrix, y: &Outcome) -> Result<FeatureScores> {
    scores_with(x, y, true)
}

/// Indices of features whose `|T_j|` reaches the `m`-th largest `|T|`;
/// ties at the cutoff are all kept.
pub fn top_features(scores: &FeatureScores, m: usize) -> Result<Vec<usize>> {
    let p = scores.t.len();
    if m == 0 || m > p {
        return Err(Error::InvalidConfig(format!("m = {m} must lie in 1..={p}")));
    }
    let mut abs: Vec<f64> = scores.t.iter().map(|t| t.abs()).collect();
    let (_, cutoff, _) = abs.select_nth_unstable_by(p - m, f64::total_cmp);
    let cutoff = *cutoff;
    Ok(scores
        .t
        .iter()
        .enumerate()
        .filter(|(_, t)| t.abs() >= cutoff)
        .map(|(j, _)| j)
        .collect())
}

/// `1/sqrt(m')` on the features passing the `|T|` cutoff, zero elsewhere.
pub fn supervised_initial_weights(scores: &FeatureScores, m: usize) -> Result<WeightVector> {
    let mut selected = vec![false; scores.t.len()];
    for j in top_features(scores, m)? {
        selected[j] = true;
    }
    WeightVector::indicator(&selected)
}

pub fn default_m(p: usize) -> usize {
    ((p as f64).sqrt().floor() as usize).clamp(1, p)
}

/// Sparse k-means started from outcome-selected weights. The first step is
/// the cluster update; weights are free to move afterwards.
pub fn supervised_sparse_clustering(
    x: &DataMatrix,
    y: &Outcome,
    cfg: &SparseConfig,
    m: Option<usize>,
) -> Result<SparseClusteringResult> {
    let scores = outcome_scores(x, y)?;
    supervised_from_scores(x, &scores, cfg, m)
}

pub fn supervised_from_scores(
    x: &DataMatrix,
    scores: &FeatureScores,
    cfg: &SparseConfig,
    m: Option<usize>,
) -> Result<SparseClusteringResult> {
    let m = m.unwrap_or_else(|| default_m(x.n_features()));
    let w0 = supervised_initial_weights(scores, m)?;
    sparse_kmeans(x, cfg, Some(&w0))
}
