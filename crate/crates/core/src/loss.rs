//! Individual loss functions over (prediction, actual) pairs and the
//! per-unit loss vectors they produce.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verdict::{Axiom, AxiomVerdict, Counterexample};

/// Errors from constructing pairs and evaluating individual losses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("input is not finite (prediction={prediction}, actual={actual})")]
    NonFiniteInput { prediction: f64, actual: f64 },
    #[error("input outside the nonnegative domain (prediction={prediction}, actual={actual})")]
    NegativeInput { prediction: f64, actual: f64 },
    #[error("percentage loss is undefined at actual = 0 (unit {})", .unit.as_deref().unwrap_or("unlabeled"))]
    ZeroActual { unit: Option<String> },
    #[error("loss overflowed the double range (prediction={prediction}, actual={actual})")]
    Overflow { prediction: f64, actual: f64 },
    #[error("loss at index {index} is not a finite nonnegative number ({value})")]
    InvalidLoss { index: usize, value: f64 },
    #[error("no units remain after skipping zero actuals")]
    EmptyAfterFiltering,
    #[error("record {unit:?} has no prediction column {column:?}")]
    MissingPredictionColumn { column: String, unit: String },
    #[error("monotonicity grid needs at least 3 distinct predictions, got {0}")]
    DegenerateGrid(usize),
}

/// One unit's prediction and realized actual, both finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionPair {
    prediction: f64,
    actual: f64,
}

impl PredictionPair {
    pub fn new(prediction: f64, actual: f64) -> Result<Self, LossError> {
        if !prediction.is_finite() || !actual.is_finite() {
            return Err(LossError::NonFiniteInput { prediction, actual });
        }
        if prediction < 0.0 || actual < 0.0 {
            return Err(LossError::NegativeInput { prediction, actual });
        }
        Ok(Self { prediction, actual })
    }

    pub fn prediction(&self) -> f64 {
        self.prediction
    }

    pub fn actual(&self) -> f64 {
        self.actual
    }
}

/// Built-in individual loss functions. The same function applies to every
/// unit, so per-unit losses are comparable across the cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    AbsoluteError,
    SquaredError,
    AbsolutePercentageError,
    SquaredPercentageError,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [
        LossKind::AbsoluteError,
        LossKind::SquaredError,
        LossKind::AbsolutePercentageError,
        LossKind::SquaredPercentageError,
    ];

    /// Percentage losses divide by the actual and are undefined at zero.
    pub fn is_percentage(self) -> bool {
        matches!(
            self,
            LossKind::AbsolutePercentageError | LossKind::SquaredPercentageError
        )
    }

    pub fn short_name(self) -> &'static str {
        match self {
            LossKind::AbsoluteError => "ae",
            LossKind::SquaredError => "se",
            LossKind::AbsolutePercentageError => "ape",
            LossKind::SquaredPercentageError => "spe",
        }
    }
}

/// What to do with zero-actual units under a percentage loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroActualPolicy {
    /// Drop the unit from the vector and record its id as skipped.
    #[default]
    Skip,
    /// Fail the whole evaluation on the first zero actual.
    Error,
}

/// An individual loss function plus its zero-actual handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndividualLossSpec {
    pub kind: LossKind,
    pub zero_actual_policy: ZeroActualPolicy,
}

impl IndividualLossSpec {
    pub fn new(kind: LossKind) -> Self {
        Self {
            kind,
            zero_actual_policy: ZeroActualPolicy::Skip,
        }
    }

    pub fn with_policy(kind: LossKind, zero_actual_policy: ZeroActualPolicy) -> Self {
        Self {
            kind,
            zero_actual_policy,
        }
    }
}

/// Evaluate one individual loss.
///
/// Percentage kinds are undefined at `actual == 0` and return
/// [`LossError::ZeroActual`] regardless of policy; skipping is a
/// vector-level behavior applied by [`eval_loss_vector`].
pub fn eval_loss(spec: IndividualLossSpec, pair: PredictionPair) -> Result<f64, LossError> {
    let (p, a) = (pair.prediction(), pair.actual());
    if spec.kind.is_percentage() && a == 0.0 {
        return Err(LossError::ZeroActual { unit: None });
    }
    let loss = match spec.kind {
        LossKind::AbsoluteError => (p - a).abs(),
        LossKind::SquaredError => (p - a) * (p - a),
        LossKind::AbsolutePercentageError => 100.0 * (p - a).abs() / a,
        LossKind::SquaredPercentageError => {
            let ratio = 100.0 * (p - a) / a;
            ratio * ratio
        }
    };
    if !loss.is_finite() {
        return Err(LossError::Overflow {
            prediction: p,
            actual: a,
        });
    }
    Ok(loss)
}

/// One cross-sectional unit: identifier, actual, and named predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub unit_id: String,
    pub actual: f64,
    pub predictions: BTreeMap<String, f64>,
}

impl PredictionRecord {
    pub fn new(unit_id: impl Into<String>, actual: f64) -> Self {
        Self {
            unit_id: unit_id.into(),
            actual,
            predictions: BTreeMap::new(),
        }
    }

    pub fn with_prediction(mut self, column: impl Into<String>, value: f64) -> Self {
        self.predictions.insert(column.into(), value);
        self
    }
}

/// Per-unit losses for one (loss function, prediction column) pair.
///
/// Entries are finite and nonnegative; order follows the input records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossVector {
    losses: Vec<f64>,
    skipped_units: Vec<String>,
    source_spec: IndividualLossSpec,
}

impl LossVector {
    pub fn new(
        losses: Vec<f64>,
        skipped_units: Vec<String>,
        source_spec: IndividualLossSpec,
    ) -> Result<Self, LossError> {
        for (index, &value) in losses.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(LossError::InvalidLoss { index, value });
            }
        }
        Ok(Self {
            losses,
            skipped_units,
            source_spec,
        })
    }

    /// A bare vector of already-computed losses, tagged with a default spec.
    pub fn from_losses(losses: Vec<f64>) -> Result<Self, LossError> {
        Self::new(
            losses,
            Vec::new(),
            IndividualLossSpec::new(LossKind::AbsoluteError),
        )
    }

    /// Same provenance, new values. Used for perturbation experiments.
    pub fn with_losses(&self, losses: Vec<f64>) -> Result<Self, LossError> {
        Self::new(losses, self.skipped_units.clone(), self.source_spec)
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn skipped_units(&self) -> &[String] {
        &self.skipped_units
    }

    pub fn source_spec(&self) -> IndividualLossSpec {
        self.source_spec
    }
}

/// Evaluate one prediction column across all records.
///
/// Zero-actual units under a percentage loss are skipped or rejected per the
/// spec's policy. Skipping every unit is an error: an empty vector has no
/// aggregate.
pub fn eval_loss_vector(
    spec: IndividualLossSpec,
    records: &[PredictionRecord],
    prediction_column: &str,
) -> Result<LossVector, LossError> {
    let mut losses = Vec::with_capacity(records.len());
    let mut skipped = Vec::new();
    for record in records {
        let Some(&prediction) = record.predictions.get(prediction_column) else {
            return Err(LossError::MissingPredictionColumn {
                column: prediction_column.to_owned(),
                unit: record.unit_id.clone(),
            });
        };
        let pair = PredictionPair::new(prediction, record.actual)?;
        if spec.kind.is_percentage() && record.actual == 0.0 {
            match spec.zero_actual_policy {
                ZeroActualPolicy::Skip => {
                    skipped.push(record.unit_id.clone());
                    continue;
                }
                ZeroActualPolicy::Error => {
                    return Err(LossError::ZeroActual {
                        unit: Some(record.unit_id.clone()),
                    });
                }
            }
        }
        losses.push(eval_loss(spec, pair)?);
    }
    if losses.is_empty() {
        return Err(LossError::EmptyAfterFiltering);
    }
    LossVector::new(losses, skipped, spec)
}

/// Check that a built-in loss is zero at `prediction == actual` and strictly
/// increases as predictions move away from the actual on either side.
pub fn check_pointwise_monotonicity(
    spec: IndividualLossSpec,
    actual: f64,
    grid: &[f64],
) -> Result<AxiomVerdict, LossError> {
    check_pointwise_monotonicity_with(
        |prediction| eval_loss(spec, PredictionPair::new(prediction, actual)?),
        actual,
        grid,
    )
}

/// Same check against an arbitrary loss callable, so falsification
/// experiments can probe non-built-in losses.
pub fn check_pointwise_monotonicity_with(
    loss_at: impl Fn(f64) -> Result<f64, LossError>,
    actual: f64,
    grid: &[f64],
) -> Result<AxiomVerdict, LossError> {
    let mut points: Vec<f64> = grid.to_vec();
    points.sort_by(f64::total_cmp);
    points.dedup();
    if points.len() < 3 {
        return Err(LossError::DegenerateGrid(points.len()));
    }
    let losses = points
        .iter()
        .map(|&p| loss_at(p))
        .collect::<Result<Vec<f64>, LossError>>()?;

    let mut comparisons: u64 = 0;
    for w in 0..points.len() - 1 {
        let (lo, hi) = (points[w], points[w + 1]);
        // Pairs straddling the actual carry no ordering constraint.
        let (near, far, l_near, l_far) = if hi <= actual {
            (hi, lo, losses[w + 1], losses[w])
        } else if lo >= actual {
            (lo, hi, losses[w], losses[w + 1])
        } else {
            continue;
        };
        comparisons += 1;
        if l_far <= l_near {
            return Ok(AxiomVerdict::fail(
                Axiom::PointwiseMonotonicity,
                comparisons,
                None,
                Counterexample {
                    description: format!(
                        "loss did not increase moving from prediction {near} to {far} (actual {actual})"
                    ),
                    input: vec![near],
                    perturbed: vec![far],
                    total_before: l_near,
                    total_after: l_far,
                },
            ));
        }
    }
    Ok(AxiomVerdict::pass(
        Axiom::PointwiseMonotonicity,
        comparisons,
        None,
    ))
}
