//! Command implementations, decoupled from flag parsing and printing.

use std::path::Path;

use thiserror::Error;

use tloss_core::aggregate::{AggregateError, AggregatorKind, AggregatorSpec, SortOrder};
use tloss_core::axiom::AxiomError;
use tloss_core::dataset::{parse_coefficients, Dataset, DatasetError};
use tloss_core::isomorphism::RANK_TIE_REL;
use tloss_core::loss::{IndividualLossSpec, LossError, LossVector, ZeroActualPolicy};
use tloss_core::report::ReportRecord;
use tloss_core::suites::{run_suites, Suite};

use crate::spec::{
    parse_agg, parse_loss_kind, parse_metric_spec, parse_transform, AggChoice, MetricChoice,
    SpecError,
};

/// Errors split by exit code: usage problems exit 1, data problems exit 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<SpecError> for CliError {
    fn from(err: SpecError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(err: DatasetError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<LossError> for CliError {
    fn from(err: LossError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<AggregateError> for CliError {
    fn from(err: AggregateError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<AxiomError> for CliError {
    fn from(err: AxiomError) -> Self {
        CliError::Usage(err.to_string())
    }
}

/// Records to print plus whether any product total collapsed to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOutcome {
    pub records: Vec<ReportRecord>,
    pub any_degenerate: bool,
}

/// Collect the metrics selected via `--metric` values and the optional
/// `--loss`/`--agg`/`--transform` triple into one list.
pub fn resolve_selections(
    metrics: &[String],
    loss: Option<&str>,
    agg: Option<&str>,
    transform: Option<&str>,
) -> Result<Vec<MetricChoice>, CliError> {
    let mut selections = Vec::with_capacity(metrics.len() + 1);
    for text in metrics {
        selections.push(parse_metric_spec(text)?);
    }
    match (loss, agg) {
        (Some(loss), Some(agg)) => {
            let transform = match transform {
                Some(text) => parse_transform(text)?,
                None => tloss_core::aggregate::Transform::None,
            };
            selections.push(MetricChoice::Explicit {
                loss: parse_loss_kind(loss)?,
                agg: parse_agg(agg)?,
                transform,
            });
        }
        (None, None) => {
            if transform.is_some() {
                return Err(CliError::Usage(
                    "--transform needs --loss and --agg".to_owned(),
                ));
            }
        }
        _ => {
            return Err(CliError::Usage(
                "--loss and --agg go together; give both or neither".to_owned(),
            ))
        }
    }
    if selections.is_empty() {
        return Err(CliError::Usage(
            "no metric selected; use --metric or --loss with --agg".to_owned(),
        ));
    }
    Ok(selections)
}

fn resolve_columns<'a>(
    dataset: &'a Dataset,
    requested: &'a [String],
) -> Result<Vec<&'a str>, CliError> {
    if requested.is_empty() {
        return Ok(dataset.column_names());
    }
    let mut columns = Vec::with_capacity(requested.len());
    for name in requested {
        if dataset.predictions(name).is_none() {
            return Err(CliError::Data(format!(
                "unknown prediction column {name:?} (dataset has: {})",
                dataset.column_names().join(", ")
            )));
        }
        columns.push(name.as_str());
    }
    Ok(columns)
}

/// An aggregator spec with any coefficient file already loaded.
fn resolve_aggregator(choice: &MetricChoice) -> Result<Option<AggregatorSpec>, CliError> {
    let MetricChoice::Explicit {
        agg, transform, ..
    } = choice
    else {
        return Ok(None);
    };
    let kind = match agg {
        AggChoice::Additive => AggregatorKind::Additive,
        AggChoice::Multiplicative => AggregatorKind::Multiplicative,
        AggChoice::Quantile(q) => AggregatorKind::Quantile(*q),
        AggChoice::LTypeFile(path) => AggregatorKind::LType {
            coefficients: parse_coefficients(Path::new(path))?,
            order: SortOrder::Ascending,
        },
    };
    Ok(Some(AggregatorSpec::with_transform(kind, *transform)))
}

fn evaluate_one(
    selection: &MetricChoice,
    aggregator: &Option<AggregatorSpec>,
    vector: &LossVector,
) -> Result<tloss_core::aggregate::TotalLossResult, CliError> {
    match (selection, aggregator) {
        (MetricChoice::Preset(preset), _) => Ok(preset.aggregate(vector)?),
        (MetricChoice::Explicit { .. }, Some(spec)) => Ok(spec.evaluate(vector)?),
        (MetricChoice::Explicit { .. }, None) => unreachable!("explicit metrics are resolved"),
    }
}

/// Compute each selected metric over each selected column.
pub fn cmd_evaluate(
    dataset: &Dataset,
    selections: &[MetricChoice],
    requested_columns: &[String],
    policy: ZeroActualPolicy,
    per_unit: bool,
) -> Result<MetricOutcome, CliError> {
    let columns = resolve_columns(dataset, requested_columns)?;
    let mut records = Vec::new();
    let mut any_degenerate = false;
    for selection in selections {
        let label = selection.label();
        let loss_spec = IndividualLossSpec::with_policy(selection.loss_kind(), policy);
        let aggregator = resolve_aggregator(selection)?;
        for column in &columns {
            let vector = dataset.loss_vector(loss_spec, column)?;
            let result = evaluate_one(selection, &aggregator, &vector)?;
            any_degenerate |= result.degenerate;
            records.push(ReportRecord::metric(
                &label,
                column,
                &result,
                vector.skipped_units(),
            ));
            if per_unit {
                let unit_ids = dataset.retained_unit_ids(&vector);
                for (unit_id, &loss) in unit_ids.iter().zip(vector.losses()) {
                    records.push(ReportRecord::UnitLoss {
                        metric: label.clone(),
                        column: (*column).to_owned(),
                        unit_id: unit_id.clone(),
                        loss,
                    });
                }
            }
        }
    }
    Ok(MetricOutcome {
        records,
        any_degenerate,
    })
}

/// Rank prediction columns by one metric, ascending: lower total loss is
/// better. Values within [`RANK_TIE_REL`] relative are flagged as ties.
pub fn cmd_rank(
    dataset: &Dataset,
    selection: &MetricChoice,
    requested_columns: &[String],
    policy: ZeroActualPolicy,
) -> Result<MetricOutcome, CliError> {
    let columns = resolve_columns(dataset, requested_columns)?;
    if columns.len() < 2 {
        return Err(CliError::Usage(format!(
            "ranking needs at least two prediction columns, got {}",
            columns.len()
        )));
    }
    let label = selection.label();
    let loss_spec = IndividualLossSpec::with_policy(selection.loss_kind(), policy);
    let aggregator = resolve_aggregator(selection)?;
    let mut scored: Vec<(String, f64, bool)> = Vec::with_capacity(columns.len());
    let mut any_degenerate = false;
    for column in &columns {
        let vector = dataset.loss_vector(loss_spec, column)?;
        let result = evaluate_one(selection, &aggregator, &vector)?;
        any_degenerate |= result.degenerate;
        scored.push((
            (*column).to_owned(),
            result.value.as_f64(),
            result.degenerate,
        ));
    }
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let records = scored
        .iter()
        .enumerate()
        .map(|(i, (column, value, degenerate))| {
            let tie_with_previous = i > 0 && {
                let prev = scored[i - 1].1;
                (value - prev).abs() <= RANK_TIE_REL * value.abs().max(prev.abs())
            };
            ReportRecord::Rank {
                metric: label.clone(),
                rank: i + 1,
                column: column.clone(),
                value: value.is_finite().then_some(*value),
                degenerate: *degenerate,
                tie_with_previous,
            }
        })
        .collect();
    Ok(MetricOutcome {
        records,
        any_degenerate,
    })
}

/// Run verification suites. Returns the records and whether every check
/// came out as expected.
pub fn cmd_verify(
    suites: &[Suite],
    seed: u64,
    trials: u64,
) -> Result<(Vec<ReportRecord>, bool), CliError> {
    let checks = run_suites(suites, seed, trials)?;
    let all_as_expected = checks.iter().all(|c| c.as_expected());
    let records = checks.iter().map(ReportRecord::verdict).collect();
    Ok((records, all_as_expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tloss_core::dataset::parse_dataset_str;

    const DATA: &str = "unit_id,actual,p1,p2\na,100,110,100\nb,200,190,240\n";

    fn dataset() -> Dataset {
        parse_dataset_str(DATA).unwrap()
    }

    fn mape() -> MetricChoice {
        crate::spec::parse_metric_spec("mape").unwrap()
    }

    #[test]
    fn evaluate_emits_one_metric_row_per_column() {
        let outcome = cmd_evaluate(
            &dataset(),
            &[mape()],
            &[],
            ZeroActualPolicy::Skip,
            false,
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 2);
        match &outcome.records[0] {
            ReportRecord::Metric {
                metric,
                column,
                value,
                ..
            } => {
                assert_eq!(metric, "mape");
                assert_eq!(column, "p1");
                assert_eq!(*value, Some(7.5));
            }
            other => panic!("expected a metric record, got {other:?}"),
        }
    }

    #[test]
    fn evaluate_honors_explicit_column_selection() {
        let outcome = cmd_evaluate(
            &dataset(),
            &[mape()],
            &["p2".to_owned()],
            ZeroActualPolicy::Skip,
            false,
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 1);
        let err = cmd_evaluate(
            &dataset(),
            &[mape()],
            &["p9".to_owned()],
            ZeroActualPolicy::Skip,
            false,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn per_unit_rows_follow_the_metric_row() {
        let outcome = cmd_evaluate(
            &dataset(),
            &[mape()],
            &["p1".to_owned()],
            ZeroActualPolicy::Skip,
            true,
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 3);
        match &outcome.records[1] {
            ReportRecord::UnitLoss { unit_id, loss, .. } => {
                assert_eq!(unit_id, "a");
                assert_eq!(*loss, 10.0);
            }
            other => panic!("expected a unit loss record, got {other:?}"),
        }
    }

    #[test]
    fn gmape_degeneracy_is_flagged() {
        let outcome = cmd_evaluate(
            &dataset(),
            &[crate::spec::parse_metric_spec("gmape").unwrap()],
            &["p2".to_owned()],
            ZeroActualPolicy::Skip,
            false,
        )
        .unwrap();
        assert!(outcome.any_degenerate);
    }

    #[test]
    fn rank_orders_columns_ascending() {
        // p1: MAPE 7.5; p2: APE losses are 0 and 20, MAPE 10.
        let outcome =
            cmd_rank(&dataset(), &mape(), &[], ZeroActualPolicy::Skip).unwrap();
        let columns: Vec<&str> = outcome
            .records
            .iter()
            .map(|r| match r {
                ReportRecord::Rank { column, .. } => column.as_str(),
                other => panic!("expected a rank record, got {other:?}"),
            })
            .collect();
        assert_eq!(columns, vec!["p1", "p2"]);
    }

    #[test]
    fn rank_flags_ties() {
        let data = parse_dataset_str("unit_id,actual,p1,p2\na,100,110,90\nb,200,190,210\n")
            .unwrap();
        let outcome = cmd_rank(&data, &mape(), &[], ZeroActualPolicy::Skip).unwrap();
        match &outcome.records[1] {
            ReportRecord::Rank {
                tie_with_previous, ..
            } => assert!(*tie_with_previous),
            other => panic!("expected a rank record, got {other:?}"),
        }
    }

    #[test]
    fn rank_needs_two_columns() {
        let err = cmd_rank(
            &dataset(),
            &mape(),
            &["p1".to_owned()],
            ZeroActualPolicy::Skip,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn selections_combine_metric_flags_and_the_split_triple() {
        let selections = resolve_selections(
            &["mape".to_owned(), "ape+quantile:0.5".to_owned()],
            Some("se"),
            Some("additive"),
            Some("mean"),
        )
        .unwrap();
        assert_eq!(selections.len(), 3);
        assert_eq!(selections[2].label(), "se+additive+mean");

        assert_eq!(
            resolve_selections(&[], None, None, None).unwrap_err().exit_code(),
            1
        );
        assert_eq!(
            resolve_selections(&[], Some("se"), None, None)
                .unwrap_err()
                .exit_code(),
            1
        );
        assert_eq!(
            resolve_selections(&[], None, None, Some("mean"))
                .unwrap_err()
                .exit_code(),
            1
        );
    }

    #[test]
    fn verify_reports_every_check_as_expected() {
        let (records, all_ok) = cmd_verify(&[Suite::Anonymity], 5, 5).unwrap();
        assert!(all_ok);
        assert!(!records.is_empty());
    }

    #[test]
    fn ltype_metric_reads_coefficients_from_disk() {
        use std::io::Write;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        let mut file = std::fs::File::create(&path).unwrap();
        writeln!(file, "1\n3").unwrap();
        let selection =
            crate::spec::parse_metric_spec(&format!("ape+ltype:{}", path.display())).unwrap();
        let outcome = cmd_evaluate(
            &dataset(),
            &[selection],
            &["p1".to_owned()],
            ZeroActualPolicy::Skip,
            false,
        )
        .unwrap();
        // APE losses sort to [5, 10]; 1 * 5 + 3 * 10 = 35.
        match &outcome.records[0] {
            ReportRecord::Metric { value, .. } => assert_eq!(*value, Some(35.0)),
            other => panic!("expected a metric record, got {other:?}"),
        }
        let missing = crate::spec::parse_metric_spec("ape+ltype:/nonexistent/w.txt").unwrap();
        let err = cmd_evaluate(
            &dataset(),
            &[missing],
            &[],
            ZeroActualPolicy::Skip,
            false,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
