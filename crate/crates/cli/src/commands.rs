//! Subcommands: cluster, simulate, evaluate, predict.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sparsecluster::baselines::{nearest_centroid_predict, pca_kmeans, semi_supervised_clustering};
use sparsecluster::evaluation::MatchCriterion;
use sparsecluster::preweighted::PreweightOptions;
use sparsecluster::simgen::{run_scenario, Method, Scenario, ScenarioRun, SpikeMode};
use sparsecluster::stats::{
    chi_square_test, cox_binary_hr, odds_ratios, ContingencyTable, ContinuityCorrection,
};
use sparsecluster::{
    preweighted_sparse_clustering, sparse_kmeans, supervised_sparse_clustering, DataMatrix,
    KMeansConfig, Outcome, SparseConfig, Standardization,
};

use crate::config::{method_label, MaskModeName, MethodName, Resolved, RunConfig, ScreeningName};
use crate::ingest::{ingest_csv, read_outcome, OutcomeColumns, Table};
use crate::report::*;

#[derive(Debug, Parser)]
#[command(
    name = "sparsecluster",
    version,
    about = "Sparse, preweighted and supervised k-means"
)]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "CLUSTER_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster the rows of a CSV file.
    Cluster(ClusterArgs),
    /// Run a simulation sweep and write a CSV report.
    Simulate(SimulateArgs),
    /// Test saved cluster labels against an outcome.
    Evaluate(EvaluateArgs),
    /// Assign new observations to the clusters of a saved result.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// JSON file with any of the settings below; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSV: header row, ids in the first column.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    #[arg(long, short)]
    pub k: Option<usize>,
    /// L1 bound on the weights (default sqrt(p)/2).
    #[arg(long)]
    pub s: Option<f64>,
    /// Screening threshold for preweighted layers (default 0.05/p).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of outcome-selected features (default floor(sqrt(p))).
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of preweighted layers.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Principal components kept by pca_kmeans.
    #[arg(long)]
    pub components: Option<usize>,
    /// Cluster the raw columns instead of z-scores.
    #[arg(long)]
    pub no_standardize: bool,
    /// Binary (0/1) outcome column.
    #[arg(long)]
    pub outcome_column: Option<String>,
    #[arg(long)]
    pub time_column: Option<String>,
    #[arg(long)]
    pub event_column: Option<String>,
    #[arg(long, value_enum)]
    pub mask_mode: Option<MaskModeName>,
    #[arg(long, value_enum)]
    pub screening: Option<ScreeningName>,
    /// Also start each k-means step from the previous centroids.
    #[arg(long)]
    pub warm_start: bool,
    /// Result JSON (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Labels CSV (default: next to the result JSON).
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

impl ClusterArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            method: self.method,
            k: self.k,
            s: self.s,
            alpha: self.alpha,
            m: self.m,
            depth: self.depth,
            seed: self.seed,
            restarts: self.restarts,
            components: self.components,
            standardize: self.no_standardize.then_some(false),
            input: self.input.clone(),
            output: self.output.clone(),
            labels: self.labels.clone(),
            outcome_column: self.outcome_column.clone(),
            time_column: self.time_column.clone(),
            event_column: self.event_column.clone(),
            mask_mode: self.mask_mode,
            screening: self.screening,
            warm_start: self.warm_start.then_some(true),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum CriterionName {
    Exact,
    MaxOneError,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SpikeName {
    PerObservation,
    PerEntry,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// vary_b, vary_sigma, vary_na, vary_pe or supervised.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated methods (default depends on the scenario).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long, value_enum, default_value_t = CriterionName::Exact)]
    pub criterion: CriterionName,
    /// How spike features of the supervised design are drawn.
    #[arg(long, value_enum, default_value_t = SpikeName::PerObservation)]
    pub spikes: SpikeName,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub components: usize,
    /// Report CSV (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    Scenario::parse(s).ok_or_else(|| format!("unknown scenario {s:?}"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| format!("unknown method {s:?}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutcomeKind {
    Binary,
    Survival,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labels CSV written by `cluster`.
    #[arg(long)]
    pub clusters: PathBuf,
    /// Labels column (default: the first after the id).
    #[arg(long)]
    pub layer: Option<String>,
    /// CSV holding the outcome, keyed by the same ids.
    #[arg(long)]
    pub outcome: PathBuf,
    #[arg(long = "type", value_enum)]
    pub kind: OutcomeKind,
    #[arg(long, default_value = "outcome")]
    pub outcome_column: String,
    #[arg(long, default_value = "time")]
    pub time_column: String,
    #[arg(long, default_value = "event")]
    pub event_column: String,
    /// Yates continuity correction (2 x 2 tables only).
    #[arg(long)]
    pub yates: bool,
    /// Reference cluster label (default: the smallest).
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Result JSON written by `cluster`.
    #[arg(long)]
    pub result: PathBuf,
    /// The CSV the result was fitted on.
    #[arg(long)]
    pub train: PathBuf,
    /// New observations; columns are matched by name.
    #[arg(long, short)]
    pub input: PathBuf,
    /// 1-based layer of a preweighted result.
    #[arg(long, default_value_t = 1)]
    pub layer: usize,
    /// Labels CSV (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    match cli.command {
        Command::Cluster(a) => {
            let file = match &a.config {
                Some(path) => RunConfig::from_file(path)?,
                None => RunConfig::default(),
            };
            cluster(&file.overlay(a.to_config()).resolve()?)
        }
        Command::Simulate(a) => simulate(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Predict(a) => predict(&a),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

fn to_json<T: serde::Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn config_doc(r: &Resolved) -> ConfigDoc {
    let prewt = r.method == MethodName::Preweighted;
    let sparse = matches!(
        r.method,
        MethodName::Sparse | MethodName::Preweighted | MethodName::Supervised
    );
    let (outcome_column, time_column, event_column) = match &r.outcome {
        OutcomeColumns::None => (None, None, None),
        OutcomeColumns::Binary(c) => (Some(c.clone()), None, None),
        OutcomeColumns::Survival { time, event } => (None, Some(time.clone()), Some(event.clone())),
    };
    ConfigDoc {
        k: r.k,
        seed: r.seed,
        restarts: r.restarts,
        standardize: r.standardize,
        s: r.s,
        alpha: r.alpha,
        m: r.m,
        depth: prewt.then_some(r.depth),
        components: (r.method == MethodName::PcaKmeans).then_some(r.components),
        mask_mode: prewt.then(|| format!("{:?}", r.mask_mode).to_lowercase()),
        screening: prewt.then(|| match r.screening {
            ScreeningName::Cumulative => "cumulative".to_string(),
            ScreeningName::PreviousLayer => "previous_layer".to_string(),
        }),
        warm_start: sparse.then_some(r.warm_start),
        outcome_column,
        time_column,
        event_column,
    }
}

/// Fits the configured method and returns the result document.
pub fn fit(r: &Resolved) -> Result<ResultDoc> {
    let (raw, outcome) = ingest_csv(&r.input, &r.outcome)
        .with_context(|| format!("reading {}", r.input.display()))?;
    let (x, standardization) = if r.standardize {
        let st = Standardization::fit(&raw)?;
        (st.apply(&raw)?, Some(st))
    } else {
        (raw, None)
    };
    let ids = x.observation_ids().to_vec();
    let names = x.feature_names().to_vec();
    let p = x.n_features();
    let mut sparse_cfg = SparseConfig::new(r.k, p).with_seed(r.seed);
    if let Some(s) = r.s {
        sparse_cfg = sparse_cfg.with_s(s);
    }
    sparse_cfg.kmeans = sparse_cfg.kmeans.with_restarts(r.restarts);
    sparse_cfg.warm_start = r.warm_start;
    let km_cfg = KMeansConfig::new(r.k)
        .with_seed(r.seed)
        .with_restarts(r.restarts);
    let need_outcome = || -> Result<&Outcome> {
        outcome
            .as_ref()
            .ok_or_else(|| anyhow!("method needs an outcome"))
    };

    let layers = match r.method {
        MethodName::Sparse => vec![LayerDoc::from_sparse(
            1,
            &sparse_kmeans(&x, &sparse_cfg, None)?,
            &ids,
            &names,
        )],
        MethodName::Supervised => {
            let res = supervised_sparse_clustering(&x, need_outcome()?, &sparse_cfg, r.m)?;
            vec![LayerDoc::from_sparse(1, &res, &ids, &names)]
        }
        MethodName::Preweighted => {
            let opts = PreweightOptions {
                alpha: r.alpha,
                depth: r.depth,
                mask_mode: r.mask_mode.into(),
                screening: r.screening.into(),
            };
            let res = preweighted_sparse_clustering(&x, &sparse_cfg, &opts)?;
            res.layers
                .iter()
                .enumerate()
                .map(|(i, layer)| {
                    let mut doc = LayerDoc::from_sparse(i + 1, layer, &ids, &names);
                    doc.screened_features = Some(
                        names
                            .iter()
                            .zip(&res.masks[i])
                            .filter(|(_, &allowed)| !allowed)
                            .map(|(n, _)| n.clone())
                            .collect(),
                    );
                    doc.significant_features = res.significant_features.get(i).copied();
                    doc
                })
                .collect()
        }
        MethodName::SemiSupervised => {
            let m =
                r.m.unwrap_or_else(|| sparsecluster::supervised::default_m(p));
            let a = semi_supervised_clustering(&x, need_outcome()?, m, &km_cfg)?;
            vec![LayerDoc::from_assignment(1, &a, &ids)]
        }
        MethodName::PcaKmeans => {
            let a = pca_kmeans(&x, r.components, &km_cfg)?;
            vec![LayerDoc::from_assignment(1, &a, &ids)]
        }
    };
    Ok(ResultDoc {
        schema_version: SCHEMA_VERSION,
        method: method_label(r.method).to_string(),
        config: config_doc(r),
        n_observations: x.n_obs(),
        n_features: p,
        feature_names: names,
        standardization: standardization.map(|s| StandardizationDoc {
            mean: s.mean,
            sd: s.sd,
        }),
        layers,
    })
}

pub fn labels_csv(doc: &ResultDoc) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    if doc.layers.len() == 1 {
        header.push("cluster".into());
    } else {
        header.extend((1..=doc.layers.len()).map(|l| format!("layer{l}")));
    }
    w.write_record(&header)?;
    for i in 0..doc.n_observations {
        let mut rec = vec![doc.layers[0].labels[i].id.clone()];
        rec.extend(doc.layers.iter().map(|l| l.labels[i].cluster.to_string()));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn summary(doc: &ResultDoc) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}: {} observations, {} features",
        doc.method, doc.n_observations, doc.n_features
    );
    for l in &doc.layers {
        let sizes: Vec<String> = l.cluster_sizes.iter().map(usize::to_string).collect();
        let _ = write!(s, "layer {}: cluster sizes {}", l.layer, sizes.join(", "));
        if let Some(w) = &l.weights {
            let nz = w.iter().filter(|f| f.weight > 0.0).count();
            let _ = write!(s, "; {nz} features weighted");
        }
        if let Some(sig) = l.significant_features {
            let _ = write!(s, "; {sig} significant");
            if sig == 0 {
                s.push_str(" (no structure found)");
            }
        }
        s.push('\n');
        for f in l.top_features(10) {
            let _ = writeln!(s, "  {:<24} {:.4}", f.feature, f.weight);
        }
    }
    s
}

fn cluster(r: &Resolved) -> Result<()> {
    let doc = fit(r)?;
    write_output(r.output.as_deref(), &to_json(&doc)?)?;
    if let Some(path) = &r.labels {
        write_output(Some(path), &labels_csv(&doc)?)?;
    }
    // Keep stdout clean when it carries the JSON.
    if r.output.is_some() {
        print!("{}", summary(&doc));
    } else {
        eprint!("{}", summary(&doc));
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let mut run = ScenarioRun::new(a.scenario, a.replicates, a.seed);
    if !a.methods.is_empty() {
        run.methods = a.methods.clone();
    }
    run.settings.s = a.s;
    run.settings.restarts = a.restarts;
    run.settings.alpha = a.alpha;
    run.settings.m = a.m;
    run.settings.pca_components = a.components;
    run.settings.criterion = match a.criterion {
        CriterionName::Exact => MatchCriterion::Exact,
        CriterionName::MaxOneError => MatchCriterion::MaxOneError,
    };
    run.settings.spikes = match a.spikes {
        SpikeName::PerObservation => SpikeMode::PerObservation,
        SpikeName::PerEntry => SpikeMode::PerEntry,
    };
    let table = run_scenario(&run)?;
    write_output(a.output.as_deref(), &table.to_csv()?)
}

/// Numeric labels sort numerically, anything else lexically after them.
fn label_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        _ => a.cmp(b),
    }
}

pub fn evaluate_doc(a: &EvaluateArgs) -> Result<EvaluationDoc> {
    let clusters = Table::read(&a.clusters)?;
    let col = match &a.layer {
        Some(name) => clusters.column_index(name)?,
        None => 0,
    };
    let raw: Vec<&str> = (0..clusters.n_rows())
        .map(|i| clusters.text(i, col))
        .collect();
    let mut levels: Vec<&str> = raw.clone();
    levels.sort_by(|x, y| label_order(x, y));
    levels.dedup();
    if levels.len() < 2 {
        bail!("need at least two clusters, found {}", levels.len());
    }
    let reference = match &a.reference {
        Some(r) => levels
            .iter()
            .position(|l| l == r)
            .ok_or_else(|| anyhow!("reference cluster {r:?} not among labels {levels:?}"))?,
        None => 0,
    };
    let index: HashMap<&str, usize> = levels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let labels: Vec<usize> = raw.iter().map(|l| index[l]).collect();

    let spec = match a.kind {
        OutcomeKind::Binary => OutcomeColumns::Binary(a.outcome_column.clone()),
        OutcomeKind::Survival => OutcomeColumns::Survival {
            time: a.time_column.clone(),
            event: a.event_column.clone(),
        },
    };
    let (ids, outcome) = read_outcome(&a.outcome, &spec)?;
    let pos: HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let rows: Vec<usize> = clusters
        .ids
        .iter()
        .map(|id| {
            pos.get(id.as_str()).copied().ok_or_else(|| {
                anyhow!(
                    "observation {id:?} has no outcome in {}",
                    a.outcome.display()
                )
            })
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    let name = |i: usize| levels[i].to_string();

    Ok(match outcome {
        Outcome::Binary(y) => {
            let case: Vec<u8> = rows.iter().map(|&i| y[i]).collect();
            let table = ContingencyTable::from_labels(&labels, &case)?;
            let correction = if a.yates {
                ContinuityCorrection::Yates
            } else {
                ContinuityCorrection::None
            };
            let (statistic, pvalue) = chi_square_test(&table, correction);
            let mut ors = odds_ratios(&table, reference)?.into_iter();
            let clusters = table
                .rows()
                .iter()
                .enumerate()
                .map(|(i, r)| BinaryClusterDoc {
                    cluster: name(i),
                    n: r[0] + r[1],
                    cases: r[1],
                    controls: r[0],
                    odds_ratio: if i == reference { None } else { ors.next() },
                })
                .collect();
            EvaluationDoc::Binary {
                schema_version: SCHEMA_VERSION,
                reference: name(reference),
                n,
                clusters,
                chi_square: ChiSquareDoc {
                    statistic,
                    df: table.rows().len() - 1,
                    pvalue,
                    yates: a.yates && table.rows().len() == 2,
                },
            }
        }
        Outcome::Survival { time, event } => {
            let mut by_cluster: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (obs, &l) in labels.iter().enumerate() {
                by_cluster.entry(l).or_default().push(rows[obs]);
            }
            let ref_rows = &by_cluster[&reference];
            let comparisons = by_cluster
                .iter()
                .filter(|(&l, _)| l != reference)
                .map(|(&l, members)| {
                    let all: Vec<usize> = ref_rows.iter().chain(members).copied().collect();
                    let group: Vec<bool> = (0..all.len()).map(|i| i >= ref_rows.len()).collect();
                    let t: Vec<f64> = all.iter().map(|&i| time[i]).collect();
                    let e: Vec<bool> = all.iter().map(|&i| event[i]).collect();
                    let fit = cox_binary_hr(&group, &t, &e)
                        .with_context(|| format!("cluster {} vs {}", name(l), name(reference)))?;
                    Ok(SurvivalComparisonDoc {
                        cluster: name(l),
                        n: members.len(),
                        events: members.iter().filter(|&&i| event[i]).count(),
                        hazard_ratio: fit.hazard_ratio,
                        beta: fit.beta,
                        se: fit.se,
                        pvalue: fit.pvalue,
                    })
                })
                .collect::<Result<_>>()?;
            EvaluationDoc::Survival {
                schema_version: SCHEMA_VERSION,
                reference: name(reference),
                n,
                reference_n: ref_rows.len(),
                reference_events: ref_rows.iter().filter(|&&i| event[i]).count(),
                comparisons,
            }
        }
    })
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    write_output(a.output.as_deref(), &to_json(&evaluate_doc(a)?)?)
}

/// Keeps the named columns of `x`, in the given order.
fn columns_by_name(x: &DataMatrix, names: &[String]) -> Result<DataMatrix> {
    let pos: HashMap<&str, usize> = x
        .feature_names()
        .iter()
        .enumerate()
        .map(|(j, n)| (n.as_str(), j))
        .collect();
    let cols = names
        .iter()
        .map(|n| {
            pos.get(n.as_str())
                .copied()
                .ok_or_else(|| anyhow!("feature {n:?} missing from the new data"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(x.select_features(&cols)?)
}

pub fn predict_labels(a: &PredictArgs) -> Result<(Vec<String>, Vec<usize>)> {
    let text = std::fs::read_to_string(&a.result)
        .with_context(|| format!("cannot read {}", a.result.display()))?;
    let doc: ResultDoc = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a result document", a.result.display()))?;
    if doc.schema_version != SCHEMA_VERSION {
        bail!("unsupported schema version {}", doc.schema_version);
    }
    let layer = a
        .layer
        .checked_sub(1)
        .and_then(|l| doc.layers.get(l))
        .ok_or_else(|| anyhow!("result has {} layer(s), not {}", doc.layers.len(), a.layer))?;
    let train_result = layer.to_sparse().ok_or_else(|| {
        anyhow!(
            "{} results carry no feature weights; predict needs sparse, preweighted or supervised",
            doc.method
        )
    })??;

    let c = &doc.config;
    let spec = match (&c.outcome_column, &c.time_column, &c.event_column) {
        (Some(o), _, _) => OutcomeColumns::Binary(o.clone()),
        (None, Some(t), Some(e)) => OutcomeColumns::Survival {
            time: t.clone(),
            event: e.clone(),
        },
        _ => OutcomeColumns::None,
    };
    let (train, _) = ingest_csv(&a.train, &spec)?;
    if train.feature_names() != doc.feature_names.as_slice() {
        bail!("training CSV columns differ from those in the result");
    }
    if train
        .observation_ids()
        .iter()
        .ne(layer.labels.iter().map(|l| &l.id))
    {
        bail!("training CSV rows differ from those in the result");
    }
    let (new_x, _) = ingest_csv(&a.input, &OutcomeColumns::None)?;
    let new_x = columns_by_name(&new_x, &doc.feature_names)?;
    let (train, new_x) = match &doc.standardization {
        Some(s) => {
            let st = Standardization {
                feature_names: doc.feature_names.clone(),
                mean: s.mean.clone(),
                sd: s.sd.clone(),
            };
            (st.apply(&train)?, st.apply(&new_x)?)
        }
        None => (train, new_x),
    };
    let labels = nearest_centroid_predict(&train, &train_result, &new_x)?;
    Ok((new_x.observation_ids().to_vec(), labels))
}

fn predict(a: &PredictArgs) -> Result<()> {
    let (ids, labels) = predict_labels(a)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "cluster"])?;
    for (id, l) in ids.iter().zip(labels) {
        w.write_record([id.as_str(), &(l + 1).to_string()])?;
    }
    write_output(a.output.as_deref(), &String::from_utf8(w.into_inner()?)?)
}
