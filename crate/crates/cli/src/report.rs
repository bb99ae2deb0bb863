//! JSON documents written by `cluster` and `evaluate`.

use serde::{Deserialize, Serialize};
use sparsecluster::{ClusterAssignment, SparseClusteringResult, WeightVector};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub schema_version: u32,
    pub method: String,
    pub config: ConfigDoc,
    pub n_observations: usize,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    /// Column means and sds used to standardize the training data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardization: Option<StandardizationDoc>,
    pub layers: Vec<LayerDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub standardize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screening: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationDoc {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDoc {
    pub id: String,
    /// 1-based.
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub feature: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    /// 1-based.
    pub layer: usize,
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    pub labels: Vec<LabelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<FeatureWeight>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_change_trace: Option<Vec<f64>>,
    /// Features barred from carrying weight in this layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screened_features: Option<Vec<String>>,
    /// Allowed features that differ significantly across this layer's
    /// clusters; zero means the layer found no real structure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significant_features: Option<usize>,
}

impl LayerDoc {
    pub fn from_assignment(layer: usize, a: &ClusterAssignment, ids: &[String]) -> Self {
        Self {
            layer,
            k: a.k(),
            cluster_sizes: a.sizes().to_vec(),
            labels: ids
                .iter()
                .zip(a.labels())
                .map(|(id, &l)| LabelDoc {
                    id: id.clone(),
                    cluster: l + 1,
                })
                .collect(),
            weights: None,
            objective: None,
            iterations: None,
            converged: None,
            weight_change_trace: None,
            screened_features: None,
            significant_features: None,
        }
    }

    pub fn from_sparse(
        layer: usize,
        r: &SparseClusteringResult,
        ids: &[String],
        names: &[String],
    ) -> Self {
        Self {
            weights: Some(
                names
                    .iter()
                    .zip(r.weights.as_slice())
                    .map(|(f, &w)| FeatureWeight {
                        feature: f.clone(),
                        weight: w,
                    })
                    .collect(),
            ),
            objective: Some(r.objective),
            iterations: Some(r.iterations),
            converged: Some(r.converged),
            weight_change_trace: Some(r.weight_change_trace.clone()),
            ..Self::from_assignment(layer, &r.assignment, ids)
        }
    }

    /// Rebuilds the library result, for prediction. `None` when the layer
    /// carries no weights.
    pub fn to_sparse(&self) -> Option<anyhow::Result<SparseClusteringResult>> {
        let weights = self.weights.as_ref()?;
        Some((|| {
            let labels = self
                .labels
                .iter()
                .map(|l| {
                    l.cluster
                        .checked_sub(1)
                        .ok_or_else(|| anyhow::anyhow!("cluster labels are 1-based"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(SparseClusteringResult {
                weights: WeightVector::new(weights.iter().map(|w| w.weight).collect())?,
                assignment: ClusterAssignment::new(labels, self.k)?,
                objective: self.objective.unwrap_or(f64::NAN),
                iterations: self.iterations.unwrap_or(0),
                weight_change_trace: self.weight_change_trace.clone().unwrap_or_default(),
                converged: self.converged.unwrap_or(false),
            })
        })())
    }

    /// Nonzero weights, largest first, ties by feature order.
    pub fn top_features(&self, n: usize) -> Vec<&FeatureWeight> {
        let Some(w) = &self.weights else {
            return vec![];
        };
        let mut nz: Vec<&FeatureWeight> = w.iter().filter(|f| f.weight > 0.0).collect();
        nz.sort_by(|a, b| b.weight.total_cmp(&a.weight));
        nz.truncate(n);
        nz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryClusterDoc {
    pub cluster: String,
    pub n: u64,
    pub cases: u64,
    pub controls: u64,
    /// Relative to the reference cluster; absent for the reference itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odds_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareDoc {
    pub statistic: f64,
    pub df: usize,
    pub pvalue: f64,
    pub yates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalComparisonDoc {
    pub cluster: String,
    pub n: usize,
    pub events: usize,
    pub hazard_ratio: f64,
    pub beta: f64,
    pub se: f64,
    pub pvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EvaluationDoc {
    Binary {
        schema_version: u32,
        reference: String,
        n: usize,
        clusters: Vec<BinaryClusterDoc>,
        chi_square: ChiSquareDoc,
    },
    Survival {
        schema_version: u32,
        reference: String,
        n: usize,
        reference_n: usize,
        reference_events: usize,
        comparisons: Vec<SurvivalComparisonDoc>,
    },
}
