//! Human-readable tables for report records.

use tloss_core::report::{format_significant, ReportRecord};

const DIGITS: usize = 6;

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String], out: &mut String| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(cell);
            if i + 1 < cells.len() {
                for _ in cell.len()..widths[i] {
                    out.push(' ');
                }
            }
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = headers.iter().map(|h| (*h).to_owned()).collect();
    render_row(&header_cells, &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    render_row(&rule, &mut out);
    for row in rows {
        render_row(row, &mut out);
    }
    out
}

fn opt_value(value: Option<f64>) -> String {
    match value {
        Some(v) => format_significant(v, DIGITS),
        None => "overflow".to_owned(),
    }
}

fn yes_no(flag: bool) -> String {
    if flag { "yes" } else { "no" }.to_owned()
}

/// Render records as aligned tables, one per record kind, in the order the
/// kinds first appear. Verdict tables end with a one-line summary.
pub fn render_records(records: &[ReportRecord]) -> String {
    let mut metric_rows = Vec::new();
    let mut unit_rows = Vec::new();
    let mut rank_rows = Vec::new();
    let mut verdict_rows = Vec::new();
    let mut mismatches = 0usize;
    let mut mismatch_notes: Vec<String> = Vec::new();

    for record in records {
        match record {
            ReportRecord::Metric {
                metric,
                column,
                value,
                log_value,
                degenerate,
                n,
                skipped,
            } => metric_rows.push(vec![
                metric.clone(),
                column.clone(),
                opt_value(*value),
                match log_value {
                    Some(v) => format_significant(*v, DIGITS),
                    None => "-".to_owned(),
                },
                yes_no(*degenerate),
                n.to_string(),
                if skipped.is_empty() {
                    "-".to_owned()
                } else {
                    skipped.join(",")
                },
            ]),
            ReportRecord::UnitLoss {
                metric,
                column,
                unit_id,
                loss,
            } => unit_rows.push(vec![
                metric.clone(),
                column.clone(),
                unit_id.clone(),
                format_significant(*loss, DIGITS),
            ]),
            ReportRecord::Rank {
                metric,
                rank,
                column,
                value,
                degenerate,
                tie_with_previous,
            } => rank_rows.push(vec![
                rank.to_string(),
                column.clone(),
                opt_value(*value),
                metric.clone(),
                yes_no(*degenerate),
                yes_no(*tie_with_previous),
            ]),
            ReportRecord::Verdict {
                suite,
                check,
                axiom,
                expected,
                status,
                as_expected,
                trials,
                seed,
                counterexample,
            } => {
                if !as_expected {
                    mismatches += 1;
                    let detail = counterexample
                        .as_ref()
                        .map(|c| format!(": {}", c.description))
                        .unwrap_or_default();
                    mismatch_notes.push(format!("mismatch in {suite}/{check}{detail}"));
                }
                verdict_rows.push(vec![
                    suite.clone(),
                    check.clone(),
                    axiom.name().to_owned(),
                    expected.name().to_owned(),
                    status.name().to_owned(),
                    if *as_expected { "ok" } else { "MISMATCH" }.to_owned(),
                    trials.to_string(),
                    seed.map(|s| s.to_string()).unwrap_or_else(|| "-".to_owned()),
                ]);
            }
        }
    }

    let mut sections = Vec::new();
    if !metric_rows.is_empty() {
        sections.push(table(
            &[
                "metric",
                "column",
                "value",
                "log_value",
                "degenerate",
                "n",
                "skipped",
            ],
            &metric_rows,
        ));
    }
    if !unit_rows.is_empty() {
        sections.push(table(&["metric", "column", "unit", "loss"], &unit_rows));
    }
    if !rank_rows.is_empty() {
        sections.push(table(
            &["rank", "column", "value", "metric", "degenerate", "tie"],
            &rank_rows,
        ));
    }
    if !verdict_rows.is_empty() {
        let mut section = table(
            &[
                "suite", "check", "axiom", "expected", "status", "result", "trials", "seed",
            ],
            &verdict_rows,
        );
        section.push('\n');
        if mismatches == 0 {
            section.push_str(&format!(
                "all {} checks behaved as expected\n",
                verdict_rows.len()
            ));
        } else {
            section.push_str(&format!(
                "{mismatches} of {} checks did not behave as expected\n",
                verdict_rows.len()
            ));
            for note in &mismatch_notes {
                section.push_str(note);
                section.push('\n');
            }
        }
        sections.push(section);
    }
    sections.join("\n")
}
