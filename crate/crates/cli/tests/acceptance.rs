//! Acceptance checks for the command-line front end: golden values on a
//! tiny hand-checked dataset, byte-determinism of structured output, and
//! the documented exit-code table. Each test prints one pass/fail line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tloss_core::report::{parse_records, ReportRecord};

/// Relative tolerance for totals recomputed by hand.
const ORACLE_REL_TOL: f64 = 1e-9;

fn report(criterion: &str, ok: bool) {
    println!(
        "acceptance: {criterion}: {}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn tloss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tloss"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal termination")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    let mut file = std::fs::File::create(&path).expect("temp files are writable");
    file.write_all(contents.as_bytes()).unwrap();
    path
}

const TWO_ROW: &str = "unit_id,actual,p1\na,100,110\nb,200,190\n";

fn metric_value(data: &Path, metric: &str) -> f64 {
    let out = tloss(&[
        "evaluate",
        data.to_str().unwrap(),
        "--metric",
        metric,
        "--format",
        "structured",
    ]);
    assert_eq!(exit_code(&out), 0);
    let records = parse_records(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    match &records[0] {
        ReportRecord::Metric { value, .. } => value.expect("finite totals"),
        other => panic!("expected a metric record, got {other:?}"),
    }
}

fn close(actual: f64, expected: f64) -> bool {
    (actual - expected).abs() <= ORACLE_REL_TOL * actual.abs().max(expected.abs())
}

#[test]
fn the_two_row_dataset_matches_hand_computed_metric_values() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "data.csv", TWO_ROW);

    // Percentage errors are 10 and 5; squared errors are 100 and 100.
    let mape = metric_value(&data, "mape");
    let rmse = metric_value(&data, "rmse");
    let medape = metric_value(&data, "medape");

    let ok = mape == 7.5 && close(rmse, 10.0) && medape == 5.0;
    report(
        "the worked two-row dataset reproduces hand-computed totals",
        ok,
    );
    assert_eq!(mape, 7.5);
    assert!(close(rmse, 10.0), "rmse was {rmse}");
    assert_eq!(medape, 5.0);
}

#[test]
fn structured_output_is_byte_identical_across_repeated_runs() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "data.csv", TWO_ROW);

    let evaluate_args = [
        "evaluate",
        data.to_str().unwrap(),
        "--metric",
        "mape",
        "--metric",
        "rmse",
        "--per-unit",
        "--format",
        "structured",
    ];
    let eval_first = tloss(&evaluate_args);
    let eval_second = tloss(&evaluate_args);

    let verify_args = [
        "verify",
        "--seed",
        "42",
        "--trials",
        "25",
        "--format",
        "structured",
    ];
    let verify_first = tloss(&verify_args);
    let verify_second = tloss(&verify_args);

    let ok = exit_code(&eval_first) == 0
        && eval_first.stdout == eval_second.stdout
        && exit_code(&verify_first) == 0
        && verify_first.stdout == verify_second.stdout
        && !verify_first.stdout.is_empty();
    report(
        "structured output repeats byte for byte under a fixed seed",
        ok,
    );
    assert_eq!(exit_code(&eval_first), 0);
    assert_eq!(eval_first.stdout, eval_second.stdout);
    assert_eq!(exit_code(&verify_first), 0);
    assert_eq!(verify_first.stdout, verify_second.stdout);
    assert!(!verify_first.stdout.is_empty());
}

#[test]
fn exit_codes_follow_the_documented_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "data.csv", TWO_ROW);
    let degenerate = write_file(
        dir.path(),
        "degenerate.csv",
        "unit_id,actual,p1\na,100,100\nb,200,240\n",
    );

    // 0: success.
    let success = tloss(&["evaluate", data.to_str().unwrap(), "--metric", "mape"]);
    // 1: usage errors (no metric; zero trials; rank with one column).
    let no_metric = tloss(&["evaluate", data.to_str().unwrap()]);
    let zero_trials = tloss(&["verify", "--trials", "0"]);
    let narrow_rank = tloss(&["rank", data.to_str().unwrap(), "--metric", "mape"]);
    // 2: data errors (missing file; unknown column).
    let missing_file = tloss(&[
        "evaluate",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--metric",
        "mape",
    ]);
    let bad_column = tloss(&[
        "evaluate",
        data.to_str().unwrap(),
        "--metric",
        "mape",
        "--column",
        "p9",
    ]);
    // 3: degeneracy under strict mode; 0 without it.
    let strict = tloss(&[
        "evaluate",
        degenerate.to_str().unwrap(),
        "--metric",
        "gmape",
        "--strict-degenerate",
    ]);
    let lenient = tloss(&[
        "evaluate",
        degenerate.to_str().unwrap(),
        "--metric",
        "gmape",
    ]);

    let codes = [
        (exit_code(&success), 0),
        (exit_code(&no_metric), 1),
        (exit_code(&zero_trials), 1),
        (exit_code(&narrow_rank), 1),
        (exit_code(&missing_file), 2),
        (exit_code(&bad_column), 2),
        (exit_code(&strict), 3),
        (exit_code(&lenient), 0),
    ];
    let ok = codes.iter().all(|(got, want)| got == want);
    report(
        "exit codes follow the documented table (0 ok, 1 usage, 2 data, 3 strict degeneracy)",
        ok,
    );
    for (i, (got, want)) in codes.iter().enumerate() {
        assert_eq!(got, want, "case {i}");
    }
}
