//! Seeded simulation designs and the scenario sweep that tallies how each
//! method recovers the planted clusters.
//!
//! Two designs are generated:
//!
//! * the block design: `n = 12` observations, `p` features; the first `p_e`
//!   features are `±a` split at observation `n_a` ("Effect 1"), the last
//!   `p_e` features are `±b` on odd/even observations ("Effect 2"), and
//!   the middle features are pure noise. Noise is `N(0, sigma^2)`.
//! * the noisy-surrogate design: 200 observations, 5000 features. Features
//!   1-50 shift from mean 1 to mean 2 between observations 1-100 and
//!   101-200; features 51-300 carry independent per-entry spikes; the rest
//!   is noise. The binary outcome matches the split with 30% of labels
//!   flipped.
//!
//! Replicate `r` of grid point `g` draws its data from the stream
//! `(seed, g, r)`, so results do not depend on execution order.

use rayon::prelude::*;

use crate::baselines::{pca_kmeans, semi_supervised_from_scores};
use crate::data::{DataMatrix, Outcome};
use crate::error::{Error, Result};
use crate::evaluation::{
    classify_layers, misclassification_count, EffectClassification, MatchCriterion,
};
use crate::kmeans::KMeansConfig;
use crate::preweighted::{preweighted_sparse_clustering, PreweightOptions};
use crate::rng::{derive_seed, Stream};
use crate::sparse::{sparse_kmeans, SparseConfig};
use crate::supervised::{default_m, outcome_scores, supervised_from_scores};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSimParams {
    pub p: usize,
    pub p_e: usize,
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub n_a: usize,
    pub n: usize,
    pub seed: u64,
}

impl Default for BlockSimParams {
    fn default() -> Self {
        Self {
            p: 50,
            p_e: 20,
            a: 6.0,
            b: 3.0,
            sigma: 1.0,
            n_a: 6,
            n: 12,
            seed: 0,
        }
    }
}

impl BlockSimParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.p_e == 0 || 2 * self.p_e > self.p {
            return bad(format!(
                "need 1 <= p_e and 2 p_e <= p, got p_e = {}, p = {}",
                self.p_e, self.p
            ));
        }
        if self.n_a == 0 || self.n_a >= self.n {
            return bad(format!(
                "need 1 <= n_a < n, got n_a = {}, n = {}",
                self.n_a, self.n
            ));
        }
        if !(self.a > 0.0 && self.sigma > 0.0 && self.b >= 0.0) {
            return bad(format!(
                "need a > 0, sigma > 0, b >= 0 (a = {}, sigma = {}, b = {})",
                self.a, self.sigma, self.b
            ));
        }
        Ok(())
    }
}

/// Planted partitions of the block design (labels 0/1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTruth {
    /// Observations `1..=n_a` versus the rest.
    pub primary: Vec<usize>,
    /// Odd versus even observations (1-based).
    pub secondary: Vec<usize>,
}

fn block_matrix_from(
    params: &BlockSimParams,
    stream: &mut Stream,
) -> Result<(DataMatrix, SimTruth)> {
    params.validate()?;
    let BlockSimParams {
        p,
        p_e,
        a,
        b,
        sigma,
        n_a,
        n,
        ..
    } = *params;
    let mut values = Vec::with_capacity(n * p);
    for obs in 1..=n {
        for feat in 1..=p {
            let mean = if feat <= p_e {
                if obs <= n_a {
                    a
                } else {
                    -a
                }
            } else if feat > p - p_e {
                if obs % 2 == 1 {
                    b
                } else {
                    -b
                }
            } else {
                0.0
            };
            values.push(mean + sigma * stream.normal());
        }
    }
    let truth = SimTruth {
        primary: (1..=n).map(|o| usize::from(o > n_a)).collect(),
        secondary: (1..=n).map(|o| usize::from(o % 2 == 0)).collect(),
    };
    Ok((DataMatrix::from_row_major(values, n, p)?, truth))
}

/// Generates one block-design matrix (observations as rows).
pub fn generate_block_matrix(params: &BlockSimParams) -> Result<(DataMatrix, SimTruth)> {
    block_matrix_from(params, &mut Stream::new(params.seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSimOutput {
    pub x: DataMatrix,
    pub y: Outcome,
    /// Observations 1-100 (label 0) versus 101-200 (label 1).
    pub truth: Vec<usize>,
}

pub const SUPERVISED_N: usize = 200;
pub const SUPERVISED_P: usize = 5000;

/// How the spike indicators of features 51-300 are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpikeMode {
    /// One uniform per observation and spike block, shared by the block's
    /// features, so each block forms its own (outcome-unrelated) clusters.
    #[default]
    PerObservation,
    /// A fresh uniform for every entry; the spike features carry no
    /// cluster structure.
    PerEntry,
}

const SPIKE_BLOCKS: [(usize, usize, f64, f64); 3] = [
    (51, 100, 0.4, 2.0),
    (101, 200, 0.7, 0.5),
    (201, 300, 0.3, 1.5),
];

fn supervised_sim_from(stream: &mut Stream, mode: SpikeMode) -> SupervisedSimOutput {
    let (n, p) = (SUPERVISED_N, SUPERVISED_P);
    let shared: Vec<Vec<f64>> = match mode {
        SpikeMode::PerObservation => SPIKE_BLOCKS
            .iter()
            .map(|_| (0..n).map(|_| stream.uniform()).collect())
            .collect(),
        SpikeMode::PerEntry => Vec::new(),
    };
    let mut values = vec![0.0; n * p];
    // feature-major draw order
    for feat in 1..=p {
        let block = SPIKE_BLOCKS
            .iter()
            .position(|&(lo, hi, _, _)| (lo..=hi).contains(&feat));
        for obs in 1..=n {
            let mean = match block {
                Some(b) => {
                    let (_, _, prob, height) = SPIKE_BLOCKS[b];
                    let u = match mode {
                        SpikeMode::PerObservation => shared[b][obs - 1],
                        SpikeMode::PerEntry => stream.uniform(),
                    };
                    if u < prob {
                        height
                    } else {
                        0.0
                    }
                }
                None if feat <= 50 => {
                    if obs <= 100 {
                        1.0
                    } else {
                        2.0
                    }
                }
                None => 0.0,
            };
            values[(obs - 1) * p + (feat - 1)] = mean + stream.normal();
        }
    }
    let truth: Vec<usize> = (1..=n).map(|o| usize::from(o > 100)).collect();
    let y = truth
        .iter()
        .map(|&t| {
            let flip = stream.uniform() < 0.3;
            (t as u8) ^ u8::from(flip)
        })
        .collect();
    SupervisedSimOutput {
        x: DataMatrix::from_row_major(values, n, p).expect("valid dimensions"),
        y: Outcome::Binary(y),
        truth,
    }
}

/// Generates one 200 x 5000 noisy-surrogate data set.
pub fn generate_supervised_sim(seed: u64) -> SupervisedSimOutput {
    generate_supervised_sim_with(seed, SpikeMode::default())
}

pub fn generate_supervised_sim_with(seed: u64, mode: SpikeMode) -> SupervisedSimOutput {
    supervised_sim_from(&mut Stream::new(seed), mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    VaryB,
    VarySigma,
    VaryNa,
    VaryPe,
    Supervised,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::VaryB => "vary_b",
            Scenario::VarySigma => "vary_sigma",
            Scenario::VaryNa => "vary_na",
            Scenario::VaryPe => "vary_pe",
            Scenario::Supervised => "supervised",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Scenario::VaryB,
            Scenario::VarySigma,
            Scenario::VaryNa,
            Scenario::VaryPe,
            Scenario::Supervised,
        ]
        .into_iter()
        .find(|sc| sc.name() == s)
    }

    /// Swept parameter name and its grid.
    pub fn grid(self) -> (&'static str, Vec<f64>) {
        match self {
            Scenario::VaryB => ("b", vec![0.5, 0.75, 1.0, 2.0, 3.0, 6.0]),
            Scenario::VarySigma => ("sigma", vec![1.0, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0]),
            Scenario::VaryNa => ("n_a", vec![6.0, 8.0, 10.0]),
            Scenario::VaryPe => ("p_e", vec![4.0, 8.0, 12.0, 16.0, 20.0, 24.0]),
            Scenario::Supervised => ("none", vec![0.0]),
        }
    }

    fn block_params(self, value: f64) -> BlockSimParams {
        let base = BlockSimParams::default();
        match self {
            Scenario::VaryB => BlockSimParams { b: value, ..base },
            Scenario::VarySigma => BlockSimParams {
                sigma: value,
                ..base
            },
            Scenario::VaryNa => BlockSimParams {
                n_a: value as usize,
                ..base
            },
            Scenario::VaryPe => BlockSimParams {
                p: 2000,
                p_e: value as usize,
                ..base
            },
            Scenario::Supervised => base,
        }
    }

    pub fn default_methods(self) -> Vec<Method> {
        match self {
            Scenario::Supervised => {
                vec![
                    Method::SupervisedSparse,
                    Method::Sparse,
                    Method::SemiSupervised,
                    Method::PcaKmeans,
                ]
            }
            _ => vec![Method::Preweighted],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Preweighted,
    SupervisedSparse,
    Sparse,
    SemiSupervised,
    PcaKmeans,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Preweighted => "preweighted",
            Method::SupervisedSparse => "supervised",
            Method::Sparse => "sparse",
            Method::SemiSupervised => "semi_supervised",
            Method::PcaKmeans => "pca_kmeans",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Method::Preweighted,
            Method::SupervisedSparse,
            Method::Sparse,
            Method::SemiSupervised,
            Method::PcaKmeans,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }
}

/// Method settings shared by every replicate of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// L1 bound; `None` uses the default for the design's `p`.
    pub s: Option<f64>,
    pub restarts: usize,
    pub alpha: Option<f64>,
    /// Outcome-selected feature count; `None` means `floor(sqrt(p))`.
    pub m: Option<usize>,
    pub pca_components: usize,
    pub criterion: MatchCriterion,
    pub spikes: SpikeMode,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            s: None,
            restarts: 20,
            alpha: None,
            m: None,
            pca_components: 3,
            criterion: MatchCriterion::Exact,
            spikes: SpikeMode::PerObservation,
        }
    }
}

impl SweepSettings {
    fn sparse_config(&self, p: usize, seed: u64) -> SparseConfig {
        let mut cfg = SparseConfig::new(2, p).with_seed(seed);
        if let Some(s) = self.s {
            cfg.s = s;
        }
        cfg.kmeans.restarts = self.restarts;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub parameter: String,
    pub value: f64,
    pub method: String,
    /// An effect classification, `failed`, or `mean` / `se` / `n`.
    pub category: String,
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    pub fn get(&self, value: f64, method: Method, category: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.method == method.name() && r.category == category)
            .map(|r| r.count)
    }

    /// CSV with header `scenario,parameter,value,method,category,count`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "scenario",
            "parameter",
            "value",
            "method",
            "category",
            "count",
        ])
        .map_err(|e| Error::Report(e.to_string()))?;
        for r in &self.rows {
            w.write_record([
                r.scenario.as_str(),
                r.parameter.as_str(),
                &r.value.to_string(),
                r.method.as_str(),
                r.category.as_str(),
                &r.count.to_string(),
            ])
            .map_err(|e| Error::Report(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub replicates: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub settings: SweepSettings,
}

impl ScenarioRun {
    pub fn new(scenario: Scenario, replicates: usize, seed: u64) -> Self {
        Self {
            scenario,
            replicates,
            methods: scenario.default_methods(),
            seed,
            settings: SweepSettings::default(),
        }
    }
}

enum Outcome1 {
    Class(EffectClassification),
    Miscount(usize),
    Failed,
}

fn method_seed(base: u64, grid: usize, rep: usize, method: Method) -> u64 {
    derive_seed(
        base,
        &[grid as u64, rep as u64, 0x5eed_0000 + method as u64],
    )
}

fn run_block_replicate(
    run: &ScenarioRun,
    grid: usize,
    value: f64,
    rep: usize,
) -> Result<Vec<Outcome1>> {
    let params = run.scenario.block_params(value);
    let (x, truth) = block_matrix_from(
        &params,
        &mut Stream::derived(run.seed, &[grid as u64, rep as u64]),
    )?;
    Ok(run
        .methods
        .iter()
        .map(|&m| {
            let cfg = run
                .settings
                .sparse_config(params.p, method_seed(run.seed, grid, rep, m));
            let opts = PreweightOptions {
                alpha: run.settings.alpha,
                ..PreweightOptions::default()
            };
            preweighted_sparse_clustering(&x, &cfg, &opts)
                .and_then(|r| {
                    classify_layers(
                        r.layers[0].assignment.labels(),
                        r.layers[1].assignment.labels(),
                        &truth.primary,
                        &truth.secondary,
                        run.settings.criterion,
                    )
                })
                .map_or(Outcome1::Failed, Outcome1::Class)
        })
        .collect())
}

fn run_supervised_replicate(run: &ScenarioRun, rep: usize) -> Result<Vec<Outcome1>> {
    let sim = supervised_sim_from(
        &mut Stream::derived(run.seed, &[0, rep as u64]),
        run.settings.spikes,
    );
    let p = sim.x.n_features();
    let m = run.settings.m.unwrap_or_else(|| default_m(p));
    let scores = outcome_scores(&sim.x, &sim.y)?;
    Ok(run
        .methods
        .iter()
        .map(|&method| {
            let seed = method_seed(run.seed, 0, rep, method);
            let cfg = run.settings.sparse_config(p, seed);
            let km = KMeansConfig::new(2)
                .with_seed(seed)
                .with_restarts(run.settings.restarts);
            let found = match method {
                Method::SupervisedSparse => {
                    supervised_from_scores(&sim.x, &scores, &cfg, Some(m)).map(|r| r.assignment)
                }
                Method::Sparse => sparse_kmeans(&sim.x, &cfg, None).map(|r| r.assignment),
                Method::SemiSupervised => semi_supervised_from_scores(&sim.x, &scores, m, &km),
                Method::PcaKmeans => pca_kmeans(&sim.x, run.settings.pca_components, &km),
                Method::Preweighted => Err(Error::InvalidConfig(
                    "preweighted is not a supervised comparator".into(),
                )),
            };
            found
                .and_then(|a| misclassification_count(a.labels(), &sim.truth))
                .map_or(Outcome1::Failed, Outcome1::Miscount)
        })
        .collect())
}

/// Runs every grid point and replicate of a scenario and tallies the
/// results. Per-replicate failures are counted, not propagated.
pub fn run_scenario(run: &ScenarioRun) -> Result<ReportTable> {
    if run.replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be at least 1".into()));
    }
    let supervised = run.scenario == Scenario::Supervised;
    if let Some(m) = run
        .methods
        .iter()
        .find(|&&m| (m == Method::Preweighted) == supervised)
    {
        return Err(Error::InvalidConfig(format!(
            "method {} does not apply to scenario {}",
            m.name(),
            run.scenario.name()
        )));
    }
    let (parameter, grid) = run.scenario.grid();
    let jobs: Vec<(usize, f64, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(g, &v)| (0..run.replicates).map(move |r| (g, v, r)))
        .collect();
    let results: Vec<Vec<Outcome1>> = jobs
        .par_iter()
        .map(|&(g, v, r)| {
            let out = if supervised {
                run_supervised_replicate(run, r)
            } else {
                run_block_replicate(run, g, v, r)
            };
            out.unwrap_or_else(|_| run.methods.iter().map(|_| Outcome1::Failed).collect())
        })
        .collect();

    let mut table = ReportTable::default();
    let row = |value: f64, method: Method, category: String, count: f64| ReportRow {
        scenario: run.scenario.name().to_string(),
        parameter: parameter.to_string(),
        value,
        method: method.name().to_string(),
        category,
        count,
    };
    for (g, &value) in grid.iter().enumerate() {
        let slice = &results[g * run.replicates..(g + 1) * run.replicates];
        for (mi, &method) in run.methods.iter().enumerate() {
            let outcomes: Vec<&Outcome1> = slice.iter().map(|o| &o[mi]).collect();
            let failed = outcomes
                .iter()
                .filter(|o| matches!(o, Outcome1::Failed))
                .count();
            if supervised {
                let counts: Vec<f64> = outcomes
                    .iter()
                    .filter_map(|o| match o {
                        Outcome1::Miscount(c) => Some(*c as f64),
                        _ => None,
                    })
                    .collect();
                let n = counts.len() as f64;
                let mean = if n > 0.0 {
                    counts.iter().sum::<f64>() / n
                } else {
                    f64::NAN
                };
                let se = if n > 1.0 {
                    (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
                } else {
                    f64::NAN
                };
                table.rows.push(row(value, method, "mean".into(), mean));
                table.rows.push(row(value, method, "se".into(), se));
                table.rows.push(row(value, method, "n".into(), n));
            } else {
                for cat in EffectClassification::CATEGORIES {
                    let c = outcomes
                        .iter()
                        .filter(|o| matches!(o, Outcome1::Class(k) if *k == cat))
                        .count();
                    table
                        .rows
                        .push(row(value, method, cat.to_string(), c as f64));
                }
            }
            table
                .rows
                .push(row(value, method, "failed".into(), failed as f64));
        }
    }
    Ok(table)
}
