//! Command-line front end for total-loss metrics over nonnegative
//! cross-sectional predictions.
//!
//! Three subcommands:
//!
//! - `evaluate` computes one or more metrics over the prediction columns of
//!   a CSV dataset,
//! - `rank` orders prediction columns by one metric (lower is better),
//! - `verify` runs the property-check suites and reports verdicts.
//!
//! Exit codes: 0 on success, 1 for usage errors or verification mismatches,
//! 2 for data errors, 3 when `--strict-degenerate` is set and a product
//! total collapsed to zero.

pub mod commands;
pub mod render;
pub mod spec;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{cmd_evaluate, cmd_rank, cmd_verify, resolve_selections, CliError};
use render::render_records;
use tloss_core::dataset::parse_dataset;
use tloss_core::loss::ZeroActualPolicy;
use tloss_core::report::{emit_records, ReportRecord};
use tloss_core::suites::Suite;

#[derive(Debug, Parser)]
#[command(
    name = "tloss",
    version,
    about = "Total-loss metrics for nonnegative cross-sectional predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute metrics over the prediction columns of a dataset
    Evaluate(EvaluateArgs),
    /// Rank prediction columns by one metric, lower totals first
    Rank(RankArgs),
    /// Run the property-check suites and report verdicts
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Aligned human-readable tables
    Table,
    /// One JSON record per line
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ZeroActualArg {
    /// Drop units whose actual is zero from percentage losses
    Skip,
    /// Fail when a percentage loss meets an actual of zero
    Error,
}

impl From<ZeroActualArg> for ZeroActualPolicy {
    fn from(arg: ZeroActualArg) -> Self {
        match arg {
            ZeroActualArg::Skip => ZeroActualPolicy::Skip,
            ZeroActualArg::Error => ZeroActualPolicy::Error,
        }
    }
}

#[derive(Debug, Args)]
struct MetricFlags {
    /// Metric to compute: a preset (mape, medape, rmse, gmape) or
    /// loss+agg[+transform]; repeatable
    #[arg(long = "metric", value_name = "SPEC")]
    metrics: Vec<String>,
    /// Individual loss: ape, ae, se, or spe; pairs with --agg
    #[arg(long, requires = "agg", value_name = "LOSS")]
    loss: Option<String>,
    /// Aggregator: additive, multiplicative, quantile:<q>, or ltype:<file>;
    /// pairs with --loss
    #[arg(long, requires = "loss", value_name = "AGG")]
    agg: Option<String>,
    /// Transform for the total: mean, geomean, root:<p>, scale:<s>, log:<b>
    #[arg(long, requires = "agg", value_name = "TRANSFORM")]
    transform: Option<String>,
}

#[derive(Debug, Args)]
struct DataFlags {
    /// CSV dataset with unit_id, actual, and prediction columns
    #[arg(value_name = "DATA")]
    data: PathBuf,
    /// Prediction column to use; repeatable (default: all)
    #[arg(long = "column", value_name = "NAME")]
    columns: Vec<String>,
    /// Handling of percentage losses at actual = 0
    #[arg(long, value_enum, default_value_t = ZeroActualArg::Skip)]
    zero_actual: ZeroActualArg,
    /// Exit 3 when any product total collapses to zero
    #[arg(long)]
    strict_degenerate: bool,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataFlags,
    #[command(flatten)]
    metric: MetricFlags,
    /// Also report each retained unit's individual loss
    #[arg(long)]
    per_unit: bool,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    data: DataFlags,
    #[command(flatten)]
    metric: MetricFlags,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite to run; repeatable (default: all)
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
    /// Seed for the generated inputs
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Trials per check
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

fn print_records(records: &[ReportRecord], format: Format) {
    match format {
        Format::Table => print!("{}", render_records(records)),
        Format::Structured => print!("{}", emit_records(records)),
    }
}

fn degenerate_exit(any_degenerate: bool, strict: bool) -> i32 {
    if any_degenerate {
        if strict {
            eprintln!("error: a product total collapsed to zero");
            return 3;
        }
        eprintln!("warning: a product total collapsed to zero");
    }
    0
}

fn run_evaluate(args: &EvaluateArgs) -> Result<i32, CliError> {
    let selections = resolve_selections(
        &args.metric.metrics,
        args.metric.loss.as_deref(),
        args.metric.agg.as_deref(),
        args.metric.transform.as_deref(),
    )?;
    let dataset = parse_dataset(&args.data.data)?;
    let outcome = cmd_evaluate(
        &dataset,
        &selections,
        &args.data.columns,
        args.data.zero_actual.into(),
        args.per_unit,
    )?;
    print_records(&outcome.records, args.data.format);
    Ok(degenerate_exit(
        outcome.any_degenerate,
        args.data.strict_degenerate,
    ))
}

fn run_rank(args: &RankArgs) -> Result<i32, CliError> {
    let selections = resolve_selections(
        &args.metric.metrics,
        args.metric.loss.as_deref(),
        args.metric.agg.as_deref(),
        args.metric.transform.as_deref(),
    )?;
    let [selection] = selections.as_slice() else {
        return Err(CliError::Usage(format!(
            "ranking needs exactly one metric, got {}",
            selections.len()
        )));
    };
    let dataset = parse_dataset(&args.data.data)?;
    let outcome = cmd_rank(
        &dataset,
        selection,
        &args.data.columns,
        args.data.zero_actual.into(),
    )?;
    print_records(&outcome.records, args.data.format);
    Ok(degenerate_exit(
        outcome.any_degenerate,
        args.data.strict_degenerate,
    ))
}

fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let suites: Vec<Suite> = if args.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suites
            .iter()
            .map(|name| {
                Suite::from_name(name).ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown suite {name:?} (available: {})",
                        Suite::ALL
                            .iter()
                            .map(|s| s.name())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let (records, all_as_expected) = cmd_verify(&suites, args.seed, args.trials)?;
    print_records(&records, args.format);
    Ok(if all_as_expected { 0 } else { 1 })
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Evaluate(args) => run_evaluate(args),
        Command::Rank(args) => run_rank(args),
        Command::Verify(args) => run_verify(args),
    }
}

/// Parse the process arguments, run the selected command, and return the
/// exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
