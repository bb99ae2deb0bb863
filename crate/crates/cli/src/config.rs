//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sparsecluster::preweighted::{MaskMode, Screening};

use crate::ingest::OutcomeColumns;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MethodName {
    Sparse,
    Preweighted,
    Supervised,
    SemiSupervised,
    PcaKmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MaskModeName {
    Hard,
    InitOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ScreeningName {
    Cumulative,
    PreviousLayer,
}

impl From<MaskModeName> for MaskMode {
    fn from(m: MaskModeName) -> Self {
        match m {
            MaskModeName::Hard => MaskMode::Hard,
            MaskModeName::InitOnly => MaskMode::InitOnly,
        }
    }
}

impl From<ScreeningName> for Screening {
    fn from(s: ScreeningName) -> Self {
        match s {
            ScreeningName::Cumulative => Screening::Cumulative,
            ScreeningName::PreviousLayer => Screening::PreviousLayer,
        }
    }
}

/// Every setting of `cluster`, all optional so a file and flags can be
/// merged field by field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Option<MethodName>,
    pub k: Option<usize>,
    pub s: Option<f64>,
    pub alpha: Option<f64>,
    pub m: Option<usize>,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub components: Option<usize>,
    pub standardize: Option<bool>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub outcome_column: Option<String>,
    pub time_column: Option<String>,
    pub event_column: Option<String>,
    pub mask_mode: Option<MaskModeName>,
    pub screening: Option<ScreeningName>,
    pub warm_start: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(
            base,
            top,
            method,
            k,
            s,
            alpha,
            m,
            depth,
            seed,
            restarts,
            components,
            standardize,
            input,
            output,
            labels,
            outcome_column,
            time_column,
            event_column,
            mask_mode,
            screening,
            warm_start
        )
    }

    pub fn resolve(self) -> Result<Resolved> {
        let method = self.method.unwrap_or(MethodName::Sparse);
        let Some(input) = self.input else {
            bail!("no input file: pass --input or set \"input\" in the config file");
        };
        let outcome = match (self.outcome_column, self.time_column, self.event_column) {
            (None, None, None) => OutcomeColumns::None,
            (Some(c), None, None) => OutcomeColumns::Binary(c),
            (None, Some(time), Some(event)) => OutcomeColumns::Survival { time, event },
            (Some(_), _, _) => {
                bail!("give either an outcome column or time and event columns, not both")
            }
            _ => bail!("a survival outcome needs both a time column and an event column"),
        };
        let only = |given: bool, name: &str, allowed: &[MethodName]| -> Result<()> {
            if given && !allowed.contains(&method) {
                bail!("{name} does not apply to method {}", method_label(method));
            }
            Ok(())
        };
        use MethodName::*;
        only(self.alpha.is_some(), "alpha", &[Preweighted])?;
        only(self.depth.is_some(), "depth", &[Preweighted])?;
        only(self.mask_mode.is_some(), "mask_mode", &[Preweighted])?;
        only(self.screening.is_some(), "screening", &[Preweighted])?;
        only(self.m.is_some(), "m", &[Supervised, SemiSupervised])?;
        only(self.s.is_some(), "s", &[Sparse, Preweighted, Supervised])?;
        only(
            self.warm_start.is_some(),
            "warm_start",
            &[Sparse, Preweighted, Supervised],
        )?;
        only(self.components.is_some(), "components", &[PcaKmeans])?;
        if matches!(method, Supervised | SemiSupervised) && outcome == OutcomeColumns::None {
            bail!(
                "method {} needs an outcome: pass --outcome-column, or --time-column and --event-column",
                method_label(method)
            );
        }
        let labels = self
            .labels
            .or_else(|| self.output.as_ref().map(|o| o.with_extension("labels.csv")));
        Ok(Resolved {
            method,
            k: self.k.unwrap_or(2),
            s: self.s,
            alpha: self.alpha,
            m: self.m,
            depth: self.depth.unwrap_or(2),
            seed: self.seed.unwrap_or(0),
            restarts: self.restarts.unwrap_or(20),
            components: self.components.unwrap_or(3),
            standardize: self.standardize.unwrap_or(true),
            input,
            output: self.output,
            labels,
            outcome,
            mask_mode: self.mask_mode.unwrap_or(MaskModeName::Hard),
            screening: self.screening.unwrap_or(ScreeningName::Cumulative),
            warm_start: self.warm_start.unwrap_or(false),
        })
    }
}

pub fn method_label(m: MethodName) -> &'static str {
    match m {
        MethodName::Sparse => "sparse",
        MethodName::Preweighted => "preweighted",
        MethodName::Supervised => "supervised",
        MethodName::SemiSupervised => "semi_supervised",
        MethodName::PcaKmeans => "pca_kmeans",
    }
}

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub method: MethodName,
    pub k: usize,
    pub s: Option<f64>,
    pub alpha: Option<f64>,
    pub m: Option<usize>,
    pub depth: usize,
    pub seed: u64,
    pub restarts: usize,
    pub components: usize,
    pub standardize: bool,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub outcome: OutcomeColumns,
    pub mask_mode: MaskModeName,
    pub screening: ScreeningName,
    pub warm_start: bool,
}
