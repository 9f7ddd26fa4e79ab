//! Total-loss functionals: additive, multiplicative, quantile, and L-type
//! aggregation of per-unit losses, plus monotone report transforms and the
//! named metric presets built from them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loss::{
    eval_loss_vector, IndividualLossSpec, LossError, LossKind, LossVector, PredictionRecord,
    ZeroActualPolicy,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("cannot aggregate an empty loss vector")]
    EmptyVector,
    #[error("quantile level must lie in (0, 1], got {0}")]
    QOutOfRange(f64),
    #[error("coefficient count {coefficients} does not match loss count {losses}")]
    LengthMismatch { coefficients: usize, losses: usize },
    #[error("coefficient {index} is negative ({value})")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("coefficient {index} is not finite ({value})")]
    NonFiniteCoefficient { index: usize, value: f64 },
    #[error("cannot take the logarithm of a non-positive total ({0})")]
    LogOfNonPositive(f64),
    #[error("transform parameter out of range: {0}")]
    BadTransform(String),
    #[error(transparent)]
    Loss(#[from] LossError),
}

/// Direction losses are sorted before L-type coefficients are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    #[default]
    Ascending,
    Descending,
}

/// The total-loss functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorKind {
    /// Sum of all losses.
    Additive,
    /// Product of all losses, carried in log space.
    Multiplicative,
    /// Order statistic at 1-based rank ceil(q * n) of the ascending sort,
    /// with no interpolation. q = 1 selects the maximum.
    Quantile(f64),
    /// Weighted sum of sorted losses with fixed nonnegative coefficients.
    LType {
        coefficients: Vec<f64>,
        order: SortOrder,
    },
}

impl AggregatorKind {
    /// The maximum loss, as the q = 1 quantile.
    pub fn max() -> Self {
        AggregatorKind::Quantile(1.0)
    }

    /// Whether every L-type coefficient is strictly positive. `None` for
    /// kinds without explicit coefficients.
    pub fn all_coefficients_positive(&self) -> Option<bool> {
        match self {
            AggregatorKind::LType { coefficients, .. } => {
                Some(coefficients.iter().all(|&c| c > 0.0))
            }
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            AggregatorKind::Additive => "additive".to_owned(),
            AggregatorKind::Multiplicative => "multiplicative".to_owned(),
            AggregatorKind::Quantile(q) => format!("quantile:{q}"),
            AggregatorKind::LType { coefficients, order } => {
                let dir = match order {
                    SortOrder::Ascending => "asc",
                    SortOrder::Descending => "desc",
                };
                format!("ltype:{}x{dir}", coefficients.len())
            }
        }
    }
}

/// Strictly increasing transforms applied to a total for reporting.
/// Rankings of prediction sets are unchanged by any of these.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    /// Divide by the number of units.
    Mean,
    /// exp(mean of logs), computed from the log-domain total when one is
    /// tracked.
    GeometricMean,
    /// p-th root, p > 0.
    Root(f64),
    /// Multiply by a positive constant.
    Scale(f64),
    /// Logarithm to base b > 1. Fails on non-positive totals.
    LogBase(f64),
}

impl Transform {
    pub fn label(&self) -> String {
        match self {
            Transform::None => "none".to_owned(),
            Transform::Mean => "mean".to_owned(),
            Transform::GeometricMean => "geomean".to_owned(),
            Transform::Root(p) => format!("root:{p}"),
            Transform::Scale(s) => format!("scale:{s}"),
            Transform::LogBase(b) => format!("log:{b}"),
        }
    }

    fn validate(&self) -> Result<(), AggregateError> {
        match *self {
            Transform::Root(p) if !(p > 0.0 && p.is_finite()) => Err(
                AggregateError::BadTransform(format!("root exponent must be positive, got {p}")),
            ),
            Transform::Scale(s) if !(s > 0.0 && s.is_finite()) => Err(
                AggregateError::BadTransform(format!("scale factor must be positive, got {s}")),
            ),
            Transform::LogBase(b) if !(b > 1.0 && b.is_finite()) => Err(
                AggregateError::BadTransform(format!("log base must exceed 1, got {b}")),
            ),
            _ => Ok(()),
        }
    }
}

/// An aggregator plus the transform applied to its total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatorSpec {
    pub kind: AggregatorKind,
    pub transform: Transform,
}

impl AggregatorSpec {
    pub fn new(kind: AggregatorKind) -> Self {
        Self {
            kind,
            transform: Transform::None,
        }
    }

    pub fn with_transform(kind: AggregatorKind, transform: Transform) -> Self {
        Self { kind, transform }
    }

    /// Aggregate a loss vector and apply the transform.
    pub fn evaluate(&self, losses: &LossVector) -> Result<TotalLossResult, AggregateError> {
        let raw = match &self.kind {
            AggregatorKind::Additive => aggregate_additive(losses)?,
            AggregatorKind::Multiplicative => aggregate_multiplicative(losses)?,
            AggregatorKind::Quantile(q) => aggregate_quantile(losses, *q)?,
            AggregatorKind::LType {
                coefficients,
                order,
            } => aggregate_ltype(losses, coefficients, *order)?,
        };
        apply_transform(&raw, self.transform)
    }

    pub fn label(&self) -> String {
        match self.transform {
            Transform::None => self.kind.label(),
            t => format!("{}+{}", self.kind.label(), t.label()),
        }
    }
}

/// Aggregate value with an explicit marker instead of raw infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TotalValue {
    Finite(f64),
    /// The true total exceeds the double range. The log-domain total, when
    /// tracked, stays finite and usable.
    Overflow,
}

impl TotalValue {
    pub fn from_f64(value: f64) -> Self {
        if value.is_finite() {
            TotalValue::Finite(value)
        } else {
            TotalValue::Overflow
        }
    }

    /// The value for arithmetic and ordering; `Overflow` maps to +inf.
    pub fn as_f64(&self) -> f64 {
        match *self {
            TotalValue::Finite(v) => v,
            TotalValue::Overflow => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            TotalValue::Finite(v) => Some(v),
            TotalValue::Overflow => None,
        }
    }
}

/// Natural-log total with an explicit marker for log of zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogTotal {
    Finite(f64),
    /// Some individual loss was exactly zero, so the product collapsed.
    NegInf,
}

impl LogTotal {
    pub fn as_f64(&self) -> f64 {
        match *self {
            LogTotal::Finite(v) => v,
            LogTotal::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            LogTotal::Finite(v) => Some(v),
            LogTotal::NegInf => None,
        }
    }
}

/// The aggregate of one loss vector under one aggregator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalLossResult {
    pub value: TotalValue,
    /// Natural log of `value`, tracked through multiplicative aggregation
    /// so huge products never have to be materialized.
    pub log_value: Option<LogTotal>,
    /// True iff a multiplicative total collapsed to zero because some
    /// individual loss was exactly zero.
    pub degenerate: bool,
    pub n_units: usize,
    /// The spec that produced this result. Iterated transforms overwrite
    /// the echo with the transform applied last.
    pub spec_echo: AggregatorSpec,
}

fn ensure_nonempty(losses: &LossVector) -> Result<(), AggregateError> {
    if losses.is_empty() {
        Err(AggregateError::EmptyVector)
    } else {
        Ok(())
    }
}

fn sorted_ascending(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

/// Left-fold sum over the ascending sort. Sorting first makes the result
/// bit-identical across permutations of the input.
pub fn canonical_sum(values: &[f64]) -> f64 {
    sorted_ascending(values).iter().sum()
}

/// Sum of losses.
pub fn aggregate_additive(losses: &LossVector) -> Result<TotalLossResult, AggregateError> {
    ensure_nonempty(losses)?;
    Ok(TotalLossResult {
        value: TotalValue::from_f64(canonical_sum(losses.losses())),
        log_value: None,
        degenerate: false,
        n_units: losses.len(),
        spec_echo: AggregatorSpec::new(AggregatorKind::Additive),
    })
}

/// Product of losses, carried as a sum of natural logs.
///
/// Any zero loss collapses the product: the value is exactly 0, the log
/// total is the negative-infinity marker, and the result is degenerate.
pub fn aggregate_multiplicative(losses: &LossVector) -> Result<TotalLossResult, AggregateError> {
    ensure_nonempty(losses)?;
    let spec_echo = AggregatorSpec::new(AggregatorKind::Multiplicative);
    let n_units = losses.len();
    if losses.losses().contains(&0.0) {
        return Ok(TotalLossResult {
            value: TotalValue::Finite(0.0),
            log_value: Some(LogTotal::NegInf),
            degenerate: true,
            n_units,
            spec_echo,
        });
    }
    let logs: Vec<f64> = losses.losses().iter().map(|l| l.ln()).collect();
    let log_total = canonical_sum(&logs);
    Ok(TotalLossResult {
        value: TotalValue::from_f64(log_total.exp()),
        log_value: Some(LogTotal::Finite(log_total)),
        degenerate: false,
        n_units,
        spec_echo,
    })
}

/// 1-based rank ceil(q * n) into the ascending sort.
pub fn quantile_rank(q: f64, n: usize) -> usize {
    ((q * n as f64).ceil() as usize).clamp(1, n)
}

/// The loss at rank ceil(q * n) of the ascending sort, q in (0, 1].
pub fn aggregate_quantile(
    losses: &LossVector,
    q: f64,
) -> Result<TotalLossResult, AggregateError> {
    ensure_nonempty(losses)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(AggregateError::QOutOfRange(q));
    }
    let sorted = sorted_ascending(losses.losses());
    let value = sorted[quantile_rank(q, sorted.len()) - 1];
    Ok(TotalLossResult {
        value: TotalValue::Finite(value),
        log_value: None,
        degenerate: false,
        n_units: losses.len(),
        spec_echo: AggregatorSpec::new(AggregatorKind::Quantile(q)),
    })
}

/// Weighted sum of sorted losses: coefficient i multiplies the i-th order
/// statistic in the requested direction.
pub fn aggregate_ltype(
    losses: &LossVector,
    coefficients: &[f64],
    order: SortOrder,
) -> Result<TotalLossResult, AggregateError> {
    ensure_nonempty(losses)?;
    if coefficients.len() != losses.len() {
        return Err(AggregateError::LengthMismatch {
            coefficients: coefficients.len(),
            losses: losses.len(),
        });
    }
    for (index, &value) in coefficients.iter().enumerate() {
        if !value.is_finite() {
            return Err(AggregateError::NonFiniteCoefficient { index, value });
        }
        if value < 0.0 {
            return Err(AggregateError::NegativeCoefficient { index, value });
        }
    }
    let mut sorted = sorted_ascending(losses.losses());
    if order == SortOrder::Descending {
        sorted.reverse();
    }
    let value: f64 = sorted
        .iter()
        .zip(coefficients)
        .map(|(&l, &c)| c * l)
        .sum();
    Ok(TotalLossResult {
        value: TotalValue::from_f64(value),
        log_value: None,
        degenerate: false,
        n_units: losses.len(),
        spec_echo: AggregatorSpec::new(AggregatorKind::LType {
            coefficients: coefficients.to_vec(),
            order,
        }),
    })
}

/// Map a total through a strictly increasing report transform.
///
/// When a log-domain total is tracked, the transform is applied there and
/// the value rebuilt by exponentiation, so overflowed products still yield
/// finite means and roots. The echo records the transform applied last.
pub fn apply_transform(
    result: &TotalLossResult,
    transform: Transform,
) -> Result<TotalLossResult, AggregateError> {
    transform.validate()?;
    let mut out = result.clone();
    out.spec_echo.transform = transform;
    if transform == Transform::None {
        return Ok(out);
    }
    let n = result.n_units as f64;

    if let Some(log_total) = result.log_value {
        match log_total {
            LogTotal::NegInf => match transform {
                // Zero is a fixed point of every transform except the log.
                Transform::Mean
                | Transform::GeometricMean
                | Transform::Root(_)
                | Transform::Scale(_) => {
                    return Ok(out);
                }
                Transform::LogBase(_) => return Err(AggregateError::LogOfNonPositive(0.0)),
                Transform::None => unreachable!(),
            },
            LogTotal::Finite(log) => {
                let new_log = match transform {
                    Transform::Mean => log - n.ln(),
                    Transform::GeometricMean => log / n,
                    Transform::Root(p) => log / p,
                    Transform::Scale(s) => log + s.ln(),
                    Transform::LogBase(b) => {
                        out.value = TotalValue::from_f64(log / b.ln());
                        out.log_value = None;
                        return Ok(out);
                    }
                    Transform::None => unreachable!(),
                };
                out.log_value = Some(LogTotal::Finite(new_log));
                out.value = TotalValue::from_f64(new_log.exp());
                return Ok(out);
            }
        }
    }

    let value = match result.value {
        TotalValue::Overflow => {
            // Without a log total the overflowed value cannot be recovered.
            out.value = TotalValue::Overflow;
            return Ok(out);
        }
        TotalValue::Finite(v) => v,
    };
    let new_value = match transform {
        Transform::Mean => value / n,
        Transform::GeometricMean => {
            if value > 0.0 {
                (value.ln() / n).exp()
            } else {
                0.0
            }
        }
        Transform::Root(p) => value.powf(1.0 / p),
        Transform::Scale(s) => s * value,
        Transform::LogBase(b) => {
            if value > 0.0 {
                value.ln() / b.ln()
            } else {
                return Err(AggregateError::LogOfNonPositive(value));
            }
        }
        Transform::None => unreachable!(),
    };
    out.value = TotalValue::from_f64(new_value);
    Ok(out)
}

/// Named metrics assembled from the pieces above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetMetric {
    /// Mean absolute percentage error: additive over APE, divided by n.
    Mape,
    /// Median absolute percentage error: the q = 0.5 quantile of APE.
    Medape,
    /// Root mean squared error: additive over SE, divided by n, square root.
    Rmse,
    /// Geometric mean absolute percentage error: multiplicative over APE,
    /// n-th root. Exactly zero whenever any unit is predicted perfectly.
    Gmape,
}

impl PresetMetric {
    pub const ALL: [PresetMetric; 4] = [
        PresetMetric::Mape,
        PresetMetric::Medape,
        PresetMetric::Rmse,
        PresetMetric::Gmape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetMetric::Mape => "mape",
            PresetMetric::Medape => "medape",
            PresetMetric::Rmse => "rmse",
            PresetMetric::Gmape => "gmape",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mape" => Some(PresetMetric::Mape),
            "medape" => Some(PresetMetric::Medape),
            "rmse" => Some(PresetMetric::Rmse),
            "gmape" => Some(PresetMetric::Gmape),
            _ => None,
        }
    }

    pub fn loss_kind(self) -> LossKind {
        match self {
            PresetMetric::Mape | PresetMetric::Medape | PresetMetric::Gmape => {
                LossKind::AbsolutePercentageError
            }
            PresetMetric::Rmse => LossKind::SquaredError,
        }
    }

    /// Run this preset's aggregation and transform chain over an
    /// already-computed loss vector.
    pub fn aggregate(self, losses: &LossVector) -> Result<TotalLossResult, AggregateError> {
        match self {
            PresetMetric::Mape => {
                apply_transform(&aggregate_additive(losses)?, Transform::Mean)
            }
            PresetMetric::Medape => aggregate_quantile(losses, 0.5),
            PresetMetric::Rmse => {
                let mean = apply_transform(&aggregate_additive(losses)?, Transform::Mean)?;
                apply_transform(&mean, Transform::Root(2.0))
            }
            PresetMetric::Gmape => {
                apply_transform(&aggregate_multiplicative(losses)?, Transform::GeometricMean)
            }
        }
    }
}

/// Evaluate a preset metric over records, skipping zero actuals.
pub fn preset_metric(
    preset: PresetMetric,
    records: &[PredictionRecord],
    prediction_column: &str,
) -> Result<TotalLossResult, AggregateError> {
    preset_metric_with_policy(preset, records, prediction_column, ZeroActualPolicy::Skip)
}

/// Evaluate a preset metric over records with an explicit zero-actual policy.
pub fn preset_metric_with_policy(
    preset: PresetMetric,
    records: &[PredictionRecord],
    prediction_column: &str,
    policy: ZeroActualPolicy,
) -> Result<TotalLossResult, AggregateError> {
    let spec = IndividualLossSpec::with_policy(preset.loss_kind(), policy);
    let losses = eval_loss_vector(spec, records, prediction_column)?;
    preset.aggregate(&losses)
}
