//! Dataset ingestion: comma-separated text with a header row naming
//! `unit_id`, `actual`, and one or more prediction columns. Fields are
//! split on bare commas with no quoting; rows are 1-based in errors, with
//! the header as row 1.

use std::collections::HashSet;
use std::path::Path;

use thiserror::Error;

use crate::loss::{eval_loss_vector, IndividualLossSpec, LossError, LossVector, PredictionRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("dataset has no data rows")]
    EmptyFile,
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("no prediction columns besides unit_id and actual")]
    NoPredictionColumns,
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} fields, got {got}")]
    RowLength {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row}: unit id is empty")]
    EmptyUnitId { row: usize },
    #[error("row {row}: duplicate unit id {unit:?}")]
    DuplicateUnitId { row: usize, unit: String },
    #[error("row {row}, column {column:?}: cannot parse {cell:?} as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        cell: String,
    },
    #[error("row {row}, column {column:?}: value {value} is not finite")]
    NonFiniteValue {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("row {row}, column {column:?}: negative value {value}")]
    NegativeValue {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("could not read {path}: {message}")]
    Io { path: String, message: String },
}

/// A parsed dataset: aligned unit ids, actuals, and named prediction
/// columns, all finite and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    unit_ids: Vec<String>,
    actuals: Vec<f64>,
    prediction_columns: Vec<(String, Vec<f64>)>,
}

impl Dataset {
    pub fn n_units(&self) -> usize {
        self.unit_ids.len()
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    pub fn actuals(&self) -> &[f64] {
        &self.actuals
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.prediction_columns
            .iter()
            .map(|(name, _)| name.as_str())
            .collect()
    }

    pub fn predictions(&self, column: &str) -> Option<&[f64]> {
        self.prediction_columns
            .iter()
            .find(|(name, _)| name == column)
            .map(|(_, values)| values.as_slice())
    }

    /// Rebuild per-unit records in input order.
    pub fn to_records(&self) -> Vec<PredictionRecord> {
        self.unit_ids
            .iter()
            .zip(&self.actuals)
            .enumerate()
            .map(|(i, (unit_id, &actual))| {
                let mut record = PredictionRecord::new(unit_id.clone(), actual);
                for (name, values) in &self.prediction_columns {
                    record = record.with_prediction(name.clone(), values[i]);
                }
                record
            })
            .collect()
    }

    /// Per-unit losses for one prediction column.
    pub fn loss_vector(
        &self,
        spec: IndividualLossSpec,
        column: &str,
    ) -> Result<LossVector, LossError> {
        eval_loss_vector(spec, &self.to_records(), column)
    }

    /// Unit ids paired with the retained losses of `vector`, i.e. input
    /// order minus the skipped units.
    pub fn retained_unit_ids(&self, vector: &LossVector) -> Vec<String> {
        let skipped: HashSet<&str> = vector
            .skipped_units()
            .iter()
            .map(|s| s.as_str())
            .collect();
        self.unit_ids
            .iter()
            .filter(|id| !skipped.contains(id.as_str()))
            .cloned()
            .collect()
    }
}

fn parse_cell(row: usize, column: &str, cell: &str) -> Result<f64, DatasetError> {
    let value: f64 = cell.parse().map_err(|_| DatasetError::NonNumericCell {
        row,
        column: column.to_owned(),
        cell: cell.to_owned(),
    })?;
    if !value.is_finite() {
        return Err(DatasetError::NonFiniteValue {
            row,
            column: column.to_owned(),
            value,
        });
    }
    if value < 0.0 {
        return Err(DatasetError::NegativeValue {
            row,
            column: column.to_owned(),
            value,
        });
    }
    Ok(value)
}

/// Parse dataset text. See the module docs for the format.
pub fn parse_dataset_str(text: &str) -> Result<Dataset, DatasetError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text
        .lines()
        .map(|line| line.strip_suffix('\r').unwrap_or(line));

    let header = lines.next().ok_or(DatasetError::EmptyFile)?;
    let names: Vec<&str> = header.split(',').collect();
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(*name) {
            return Err(DatasetError::DuplicateColumn((*name).to_owned()));
        }
    }
    let unit_col = names
        .iter()
        .position(|&n| n == "unit_id")
        .ok_or_else(|| DatasetError::MissingColumn("unit_id".to_owned()))?;
    let actual_col = names
        .iter()
        .position(|&n| n == "actual")
        .ok_or_else(|| DatasetError::MissingColumn("actual".to_owned()))?;
    let prediction_cols: Vec<(usize, String)> = names
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != unit_col && i != actual_col)
        .map(|(i, &name)| (i, name.to_owned()))
        .collect();
    if prediction_cols.is_empty() {
        return Err(DatasetError::NoPredictionColumns);
    }

    let mut unit_ids = Vec::new();
    let mut actuals = Vec::new();
    let mut prediction_columns: Vec<(String, Vec<f64>)> = prediction_cols
        .iter()
        .map(|(_, name)| (name.clone(), Vec::new()))
        .collect();
    let mut seen_units = HashSet::new();

    for (line_index, line) in lines.enumerate() {
        let row = line_index + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(DatasetError::RowLength {
                row,
                expected: names.len(),
                got: fields.len(),
            });
        }
        let unit_id = fields[unit_col];
        if unit_id.is_empty() {
            return Err(DatasetError::EmptyUnitId { row });
        }
        if !seen_units.insert(unit_id.to_owned()) {
            return Err(DatasetError::DuplicateUnitId {
                row,
                unit: unit_id.to_owned(),
            });
        }
        unit_ids.push(unit_id.to_owned());
        actuals.push(parse_cell(row, "actual", fields[actual_col])?);
        for (slot, (col_index, name)) in prediction_cols.iter().enumerate() {
            prediction_columns[slot]
                .1
                .push(parse_cell(row, name, fields[*col_index])?);
        }
    }

    if unit_ids.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    Ok(Dataset {
        unit_ids,
        actuals,
        prediction_columns,
    })
}

/// Read and parse a dataset file.
pub fn parse_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_dataset_str(&text)
}

/// Parse an L-type coefficient file: one coefficient per line, blank lines
/// ignored. Sign and count are validated at aggregation time.
pub fn parse_coefficients_str(text: &str) -> Result<Vec<f64>, DatasetError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut coefficients = Vec::new();
    for (line_index, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let row = line_index + 1;
        let value: f64 = line.parse().map_err(|_| DatasetError::NonNumericCell {
            row,
            column: "coefficient".to_owned(),
            cell: line.to_owned(),
        })?;
        if !value.is_finite() {
            return Err(DatasetError::NonFiniteValue {
                row,
                column: "coefficient".to_owned(),
                value,
            });
        }
        coefficients.push(value);
    }
    if coefficients.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    Ok(coefficients)
}

/// Read and parse a coefficient file.
pub fn parse_coefficients(path: &Path) -> Result<Vec<f64>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_coefficients_str(&text)
}
