//! Machine-readable report records: one JSON object per line, stable field
//! order, re-parseable into the same structures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{LogTotal, TotalLossResult};
use crate::suites::SuiteCheck;
use crate::verdict::{Axiom, Counterexample, VerdictStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One line of a structured report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ReportRecord {
    /// An aggregate metric value for one prediction column.
    Metric {
        metric: String,
        column: String,
        /// Absent when the total overflowed the double range.
        value: Option<f64>,
        /// Natural-log total, absent unless tracked and finite.
        log_value: Option<f64>,
        degenerate: bool,
        n: usize,
        skipped: Vec<String>,
    },
    /// One unit's individual loss.
    UnitLoss {
        metric: String,
        column: String,
        unit_id: String,
        loss: f64,
    },
    /// One row of a ranking, 1-based, ascending by value.
    Rank {
        metric: String,
        rank: usize,
        column: String,
        value: Option<f64>,
        degenerate: bool,
        tie_with_previous: bool,
    },
    /// One verification check outcome.
    Verdict {
        suite: String,
        check: String,
        axiom: Axiom,
        expected: VerdictStatus,
        status: VerdictStatus,
        as_expected: bool,
        trials: u64,
        seed: Option<u64>,
        counterexample: Option<Counterexample>,
    },
}

impl ReportRecord {
    pub fn metric(
        metric: &str,
        column: &str,
        result: &TotalLossResult,
        skipped: &[String],
    ) -> Self {
        ReportRecord::Metric {
            metric: metric.to_owned(),
            column: column.to_owned(),
            value: result.value.finite(),
            log_value: match result.log_value {
                Some(LogTotal::Finite(v)) => Some(v),
                _ => None,
            },
            degenerate: result.degenerate,
            n: result.n_units,
            skipped: skipped.to_vec(),
        }
    }

    pub fn verdict(check: &SuiteCheck) -> Self {
        ReportRecord::Verdict {
            suite: check.suite.clone(),
            check: check.check.clone(),
            axiom: check.verdict.axiom,
            expected: check.expected,
            status: check.verdict.status,
            as_expected: check.as_expected(),
            trials: check.verdict.trials,
            seed: check.verdict.seed,
            counterexample: check.verdict.counterexample.clone(),
        }
    }
}

/// Serialize records as one JSON object per line. Field order follows the
/// struct declarations, so equal inputs yield byte-equal output.
pub fn emit_records(records: &[ReportRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(
            &serde_json::to_string(record).expect("report records always serialize"),
        );
        out.push('\n');
    }
    out
}

/// Parse a structured report back into records. Blank lines are ignored.
pub fn parse_records(text: &str) -> Result<Vec<ReportRecord>, ReportError> {
    let mut records = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let record =
            serde_json::from_str(line).map_err(|e| ReportError::Parse {
                line: index + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

/// Fixed-width decimal formatting with `digits` significant digits.
/// Falls back to scientific notation outside [1e-4, 10^digits).
pub fn format_significant(value: f64, digits: usize) -> String {
    debug_assert!(digits > 0);
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0".to_owned();
    }
    let magnitude = value.abs().log10().floor() as i32;
    if magnitude >= digits as i32 || magnitude < -4 {
        format!("{value:.prec$e}", prec = digits - 1)
    } else {
        let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
        format!("{value:.decimals$}")
    }
}
