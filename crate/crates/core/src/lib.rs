//! Accuracy metrics for nonnegative cross-sectional predictions.
//!
//! A metric here is built from three orthogonal choices:
//!
//! * an individual loss applied to each (prediction, actual) pair
//!   ([`loss`]),
//! * a total-loss functional collapsing the per-unit losses into one
//!   number: additive, multiplicative, quantile, or L-type ([`aggregate`]),
//! * an optional strictly increasing report transform (mean, root, log,
//!   ...) that never changes how prediction sets rank ([`aggregate`]).
//!
//! Familiar metrics are compositions: MAPE is additive-mean over absolute
//! percentage errors, RMSE is additive-mean-root over squared errors,
//! GMAPE is multiplicative-geomean over absolute percentage errors.
//!
//! The [`axiom`] and [`suites`] modules verify the properties that make a
//! total loss trustworthy for ranking prediction sets: permutation
//! invariance, strict monotonicity in every individual loss, and
//! minimization exactly at the truth. They also construct reproducible
//! counterexamples for the aggregators that lack them: quantiles are blind
//! to everything but one order statistic, and L-types with a zero
//! coefficient are blind to theirs.
//!
//! [`isomorphism`] maps positive losses into log space and back, where
//! multiplicative totals become additive ones without changing any
//! ranking. [`dataset`] and [`report`] handle dataset ingestion and
//! machine-readable output.
//!
//! ```
//! use tloss_core::{parse_dataset_str, preset_metric, PresetMetric};
//!
//! let dataset = parse_dataset_str("unit_id,actual,p1\na,100,110\nb,200,190\n")?;
//! let records = dataset.to_records();
//!
//! let mape = preset_metric(PresetMetric::Mape, &records, "p1")?;
//! assert_eq!(mape.value.finite(), Some(7.5));
//!
//! let rmse = preset_metric(PresetMetric::Rmse, &records, "p1")?;
//! assert_eq!(rmse.value.finite(), Some(10.0));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod aggregate;
pub mod axiom;
pub mod dataset;
pub mod isomorphism;
pub mod loss;
pub mod report;
pub mod suites;
pub mod verdict;

pub use aggregate::{
    aggregate_additive, aggregate_ltype, aggregate_multiplicative, aggregate_quantile,
    apply_transform, preset_metric, preset_metric_with_policy, AggregateError, AggregatorKind,
    AggregatorSpec, LogTotal, PresetMetric, SortOrder, TotalLossResult, TotalValue, Transform,
};
pub use axiom::{
    ltype_blind_spot_counterexample, quantile_blind_spot_counterexample, strictly_increased, verify_anonymity,
    verify_fisher_consistency, verify_total_monotonicity, AxiomError, Perturbation,
    MIN_PERTURBATION_REL, STRICTNESS_REL,
};
pub use dataset::{
    parse_coefficients, parse_coefficients_str, parse_dataset, parse_dataset_str, Dataset,
    DatasetError,
};
pub use isomorphism::{
    check_rank_preservation, shift_positive, to_exp_domain, to_log_domain,
    to_log_domain_shifted, Domain, DomainTag, IsoError, TaggedVector, NATURAL_BASE,
};
pub use loss::{
    check_pointwise_monotonicity, check_pointwise_monotonicity_with, eval_loss,
    eval_loss_vector, IndividualLossSpec, LossError, LossKind, LossVector, PredictionPair,
    PredictionRecord, ZeroActualPolicy,
};
pub use report::{emit_records, format_significant, parse_records, ReportError, ReportRecord};
pub use suites::{run_suites, Suite, SuiteCheck};
pub use verdict::{Axiom, AxiomVerdict, Counterexample, VerdictStatus};
