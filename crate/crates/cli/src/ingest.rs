//! Strict CSV ingestion: header row, observation ids in the first column,
//! numeric cells everywhere else.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sparsecluster::{DataMatrix, Outcome};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}: file has no data rows")]
    EmptyFile(PathBuf),
    /// `row` counts file lines (the header is line 1); `col` is 1-based.
    #[error("line {row}, column {col} ({column}): cannot parse {value:?} as {expected}")]
    ParseError {
        row: usize,
        col: usize,
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("column {0:?} not found in header")]
    MissingOutcomeColumn(String),
    #[error("line {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate observation id {0:?}")]
    DuplicateId(String),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Data(#[from] sparsecluster::Error),
}

/// Which columns hold the outcome, if any.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OutcomeColumns {
    #[default]
    None,
    Binary(String),
    Survival {
        time: String,
        event: String,
    },
}

/// Raw table: header names after the id column, ids, and string cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub ids: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(file);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 {
            return Err(IngestError::EmptyFile(path.to_path_buf()));
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        let mut seen = HashMap::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(IngestError::RaggedRow {
                    row: i + 2,
                    expected: header.len(),
                    found: record.len(),
                });
            }
            let id = record[0].to_string();
            if seen.insert(id.clone(), i).is_some() {
                return Err(IngestError::DuplicateId(id));
            }
            ids.push(id);
            rows.push(record.iter().skip(1).map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(IngestError::EmptyFile(path.to_path_buf()));
        }
        Ok(Self {
            columns: header[1..].to_vec(),
            ids,
            rows,
        })
    }

    pub fn column_index(&self, name: &str) -> Result<usize, IngestError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| IngestError::MissingOutcomeColumn(name.to_string()))
    }

    fn cell(&self, i: usize, j: usize) -> &str {
        &self.rows[i][j]
    }

    fn parse_error(&self, i: usize, j: usize, expected: &'static str) -> IngestError {
        IngestError::ParseError {
            row: i + 2,
            col: j + 2,
            column: self.columns[j].clone(),
            value: self.cell(i, j).to_string(),
            expected,
        }
    }

    pub fn number(&self, i: usize, j: usize) -> Result<f64, IngestError> {
        match self.cell(i, j).parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.parse_error(i, j, "a finite number")),
        }
    }

    pub fn text(&self, i: usize, j: usize) -> &str {
        self.cell(i, j)
    }

    fn binary(&self, i: usize, j: usize) -> Result<u8, IngestError> {
        match self.cell(i, j) {
            "0" | "0.0" => Ok(0),
            "1" | "1.0" => Ok(1),
            _ => Err(self.parse_error(i, j, "0 or 1")),
        }
    }

    fn flag(&self, i: usize, j: usize) -> Result<bool, IngestError> {
        match self.cell(i, j).to_ascii_lowercase().as_str() {
            "0" | "0.0" | "false" => Ok(false),
            "1" | "1.0" | "true" => Ok(true),
            _ => Err(self.parse_error(i, j, "an event indicator (0/1)")),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Extracts the outcome and returns the indices of the remaining columns.
    pub fn outcome(
        &self,
        spec: &OutcomeColumns,
    ) -> Result<(Option<Outcome>, Vec<usize>), IngestError> {
        let (outcome, used) = match spec {
            OutcomeColumns::None => (None, vec![]),
            OutcomeColumns::Binary(name) => {
                let j = self.column_index(name)?;
                let y = (0..self.n_rows())
                    .map(|i| self.binary(i, j))
                    .collect::<Result<_, _>>()?;
                (Some(Outcome::Binary(y)), vec![j])
            }
            OutcomeColumns::Survival { time, event } => {
                let (jt, je) = (self.column_index(time)?, self.column_index(event)?);
                let t = (0..self.n_rows())
                    .map(|i| self.number(i, jt))
                    .collect::<Result<_, _>>()?;
                let e = (0..self.n_rows())
                    .map(|i| self.flag(i, je))
                    .collect::<Result<_, _>>()?;
                (Some(Outcome::Survival { time: t, event: e }), vec![jt, je])
            }
        };
        let rest = (0..self.columns.len())
            .filter(|j| !used.contains(j))
            .collect();
        Ok((outcome, rest))
    }
}

/// Reads a feature matrix, pulling the named outcome columns out of the
/// feature set.
pub fn ingest_csv(
    path: &Path,
    outcome: &OutcomeColumns,
) -> Result<(DataMatrix, Option<Outcome>), IngestError> {
    let table = Table::read(path)?;
    let (y, features) = table.outcome(outcome)?;
    let mut values = Vec::with_capacity(table.n_rows() * features.len());
    for i in 0..table.n_rows() {
        for &j in &features {
            values.push(table.number(i, j)?);
        }
    }
    let names = features.iter().map(|&j| table.columns[j].clone()).collect();
    let x = DataMatrix::new(
        values,
        table.n_rows(),
        features.len(),
        names,
        table.ids.clone(),
    )?;
    Ok((x, y))
}

/// Reads only the outcome columns of a file, keyed by observation id.
pub fn read_outcome(
    path: &Path,
    spec: &OutcomeColumns,
) -> Result<(Vec<String>, Outcome), IngestError> {
    let table = Table::read(path)?;
    let (y, _) = table.outcome(spec)?;
    let y = y.ok_or_else(|| IngestError::MissingOutcomeColumn("<none given>".into()))?;
    Ok((table.ids, y))
}
