//! Empirical verification of the aggregation properties: permutation
//! invariance, strict monotonicity of totals, minimization at the truth,
//! and constructive counterexamples for the aggregators that fail them.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{
    aggregate_ltype, aggregate_quantile, quantile_rank, AggregateError, AggregatorKind,
    AggregatorSpec, SortOrder,
};
use crate::loss::{eval_loss, IndividualLossSpec, LossError, LossVector, PredictionPair};
use crate::verdict::{Axiom, AxiomVerdict, Counterexample};

/// Relative increase at or below this is treated as "no increase".
pub const STRICTNESS_REL: f64 = 1e-12;
/// Random multiplicative perturbations are at least this large.
pub const MIN_PERTURBATION_REL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AxiomError {
    #[error("no trials requested")]
    NoTrials,
    #[error("need at least {needed} losses, got {got}")]
    TooFewLosses { needed: usize, got: usize },
    #[error("all losses equal the maximum; no sub-maximal loss to raise")]
    NoNonMaximalLoss,
    #[error("quantile level {q} selects the maximum at n = {n}; raising the maximum would move the total")]
    QuantileAtMaximum { q: f64, n: usize },
    #[error("coefficients have no zero entry")]
    NoZeroCoefficient,
    #[error("no zero coefficient sits at an order statistic with room to grow")]
    NoSlackAtZeroCoefficient,
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("actual at index {index} must be strictly positive to perturb multiplicatively, got {value}")]
    NonPositiveActual { index: usize, value: f64 },
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Loss(#[from] LossError),
}

/// True when `after` exceeds `before` by more than [`STRICTNESS_REL`]
/// relative to the larger magnitude.
pub fn strictly_increased(before: f64, after: f64) -> bool {
    after - before > STRICTNESS_REL * before.abs().max(after.abs())
}

/// A single-loss raise used to probe total-loss monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Raise the loss at `index` by `delta` > 0, unconstrained.
    Delta { index: usize, delta: f64 },
    /// Raise the loss at `index` by `epsilon` > 0 while staying strictly
    /// below the vector maximum.
    EpsilonBelowMax { index: usize, epsilon: f64 },
}

impl Perturbation {
    /// Apply to a copy of `losses`, validating the constraints.
    pub fn apply(&self, losses: &[f64]) -> Result<Vec<f64>, AxiomError> {
        let (index, amount) = match *self {
            Perturbation::Delta { index, delta } => (index, delta),
            Perturbation::EpsilonBelowMax { index, epsilon } => (index, epsilon),
        };
        if index >= losses.len() {
            return Err(AxiomError::InvalidPerturbation(format!(
                "index {index} out of bounds for {} losses",
                losses.len()
            )));
        }
        if !(amount > 0.0 && amount.is_finite()) {
            return Err(AxiomError::InvalidPerturbation(format!(
                "raise must be positive and finite, got {amount}"
            )));
        }
        let mut out = losses.to_vec();
        out[index] += amount;
        if let Perturbation::EpsilonBelowMax { .. } = self {
            let max = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if losses[index] >= max {
                return Err(AxiomError::InvalidPerturbation(
                    "cannot epsilon-raise the maximum itself".to_owned(),
                ));
            }
            if out[index] >= max {
                return Err(AxiomError::InvalidPerturbation(format!(
                    "epsilon {amount} pushes the loss to or past the maximum {max}"
                )));
            }
        }
        Ok(out)
    }
}

fn spec_total(spec: &AggregatorSpec) -> impl Fn(&[f64]) -> Result<f64, AggregateError> + '_ {
    move |values| {
        let vector = LossVector::from_losses(values.to_vec())?;
        Ok(spec.evaluate(&vector)?.value.as_f64())
    }
}

/// Check that a spec's total is unchanged, bit for bit, under random
/// permutations of the losses.
pub fn verify_anonymity(
    spec: &AggregatorSpec,
    losses: &LossVector,
    n_permutations: u64,
    seed: u64,
) -> Result<AxiomVerdict, AxiomError> {
    verify_anonymity_with(spec_total(spec), losses.losses(), n_permutations, seed)
}

/// Permutation-invariance check against an arbitrary total function.
pub fn verify_anonymity_with(
    total: impl Fn(&[f64]) -> Result<f64, AggregateError>,
    losses: &[f64],
    n_permutations: u64,
    seed: u64,
) -> Result<AxiomVerdict, AxiomError> {
    if n_permutations == 0 {
        return Err(AxiomError::NoTrials);
    }
    let baseline = total(losses)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..n_permutations {
        let mut permuted = losses.to_vec();
        permuted.shuffle(&mut rng);
        let value = total(&permuted)?;
        if value.to_bits() != baseline.to_bits() {
            return Ok(AxiomVerdict::fail(
                Axiom::Anonymity,
                trial + 1,
                Some(seed),
                Counterexample {
                    description: "permuting the losses changed the total".to_owned(),
                    input: losses.to_vec(),
                    perturbed: permuted,
                    total_before: baseline,
                    total_after: value,
                },
            ));
        }
    }
    Ok(AxiomVerdict::pass(
        Axiom::Anonymity,
        n_permutations,
        Some(seed),
    ))
}

/// Check that every perturbation strictly increases the spec's total.
pub fn verify_total_monotonicity(
    spec: &AggregatorSpec,
    losses: &LossVector,
    perturbations: &[Perturbation],
) -> Result<AxiomVerdict, AxiomError> {
    verify_total_monotonicity_with(spec_total(spec), losses.losses(), perturbations)
}

/// Monotonicity check against an arbitrary total function.
pub fn verify_total_monotonicity_with(
    total: impl Fn(&[f64]) -> Result<f64, AggregateError>,
    losses: &[f64],
    perturbations: &[Perturbation],
) -> Result<AxiomVerdict, AxiomError> {
    if perturbations.is_empty() {
        return Err(AxiomError::NoTrials);
    }
    let before = total(losses)?;
    for (trial, perturbation) in perturbations.iter().enumerate() {
        let perturbed = perturbation.apply(losses)?;
        let after = total(&perturbed)?;
        if !strictly_increased(before, after) {
            return Ok(AxiomVerdict::fail(
                Axiom::TotalMonotonicity,
                trial as u64 + 1,
                None,
                Counterexample {
                    description: format!(
                        "raising loss {} left the total at {after} (was {before})",
                        match perturbation {
                            Perturbation::Delta { index, .. } => *index,
                            Perturbation::EpsilonBelowMax { index, .. } => *index,
                        }
                    ),
                    input: losses.to_vec(),
                    perturbed,
                    total_before: before,
                    total_after: after,
                },
            ));
        }
    }
    Ok(AxiomVerdict::pass(
        Axiom::TotalMonotonicity,
        perturbations.len() as u64,
        None,
    ))
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Construct the quantile blind spot: a raise that leaves the quantile
/// total unchanged, bit for bit.
///
/// For q < 1 the maximum is raised by 1; this needs the selected rank to
/// sit strictly below the top, i.e. ceil(q * n) < n. For q = 1 the largest
/// sub-maximal loss is raised halfway to the maximum.
pub fn quantile_blind_spot_counterexample(
    q: f64,
    losses: &LossVector,
) -> Result<Counterexample, AxiomError> {
    let values = losses.losses();
    let n = values.len();
    if n < 2 {
        return Err(AxiomError::TooFewLosses { needed: 2, got: n });
    }
    let before = aggregate_quantile(losses, q)?.value.as_f64();

    let (index, raise, description) = if q < 1.0 {
        if quantile_rank(q, n) == n {
            return Err(AxiomError::QuantileAtMaximum { q, n });
        }
        let index = argmax(values);
        (
            index,
            1.0,
            format!(
                "raising the maximum by 1 cannot move the rank-{} statistic",
                quantile_rank(q, n)
            ),
        )
    } else {
        let max = values[argmax(values)];
        let index = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < max)
            .max_by(|(_, a), (_, b)| a.total_cmp(b))
            .map(|(i, _)| i)
            .ok_or(AxiomError::NoNonMaximalLoss)?;
        (
            index,
            (max - values[index]) / 2.0,
            "raising a sub-maximal loss halfway to the maximum cannot move the maximum".to_owned(),
        )
    };

    let mut perturbed = values.to_vec();
    perturbed[index] += raise;
    let after = aggregate_quantile(&losses.with_losses(perturbed.clone())?, q)?
        .value
        .as_f64();
    debug_assert_eq!(before.to_bits(), after.to_bits());
    Ok(Counterexample {
        description,
        input: values.to_vec(),
        perturbed,
        total_before: before,
        total_after: after,
    })
}

/// Construct the blind spot of an L-type with some zero coefficient: a
/// raise confined to that coefficient's order statistic, leaving the total
/// unchanged, bit for bit.
pub fn ltype_blind_spot_counterexample(
    coefficients: &[f64],
    order: SortOrder,
    losses: &LossVector,
) -> Result<Counterexample, AxiomError> {
    let values = losses.losses();
    let n = values.len();
    if n < 2 {
        return Err(AxiomError::TooFewLosses { needed: 2, got: n });
    }
    if coefficients.len() != n {
        return Err(AggregateError::LengthMismatch {
            coefficients: coefficients.len(),
            losses: n,
        }
        .into());
    }
    if !coefficients.contains(&0.0) {
        return Err(AxiomError::NoZeroCoefficient);
    }
    let before = aggregate_ltype(losses, coefficients, order)?.value.as_f64();

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if order == SortOrder::Descending {
        sorted.reverse();
    }

    // A raise at sorted position j stays at position j when j holds the
    // largest copy of its value and the raise stays below the next value up
    // (or j is the top of the sort, where any raise works).
    let mut chosen: Option<(usize, f64)> = None;
    for (j, &c) in coefficients.iter().enumerate() {
        if c != 0.0 {
            continue;
        }
        let at_top = match order {
            SortOrder::Ascending => j == n - 1,
            SortOrder::Descending => j == 0,
        };
        if at_top {
            chosen = Some((j, 1.0));
            break;
        }
        let next_up = match order {
            SortOrder::Ascending => sorted[j + 1],
            SortOrder::Descending => sorted[j - 1],
        };
        if next_up > sorted[j] {
            let raise = (next_up - sorted[j]) / 2.0;
            if raise > 0.0 && sorted[j] + raise < next_up {
                chosen = Some((j, raise));
                break;
            }
        }
    }
    let Some((position, raise)) = chosen else {
        return Err(AxiomError::NoSlackAtZeroCoefficient);
    };

    let target = sorted[position];
    let index = values
        .iter()
        .position(|&v| v == target)
        .expect("sorted value must come from the input");
    let mut perturbed = values.to_vec();
    perturbed[index] += raise;
    let after = aggregate_ltype(&losses.with_losses(perturbed.clone())?, coefficients, order)?
        .value
        .as_f64();
    debug_assert_eq!(before.to_bits(), after.to_bits());
    Ok(Counterexample {
        description: format!(
            "zero coefficient at sorted position {position} leaves the total blind to a raise of {raise} there"
        ),
        input: values.to_vec(),
        perturbed,
        total_before: before,
        total_after: after,
    })
}

/// Check that predicting the actuals exactly minimizes the total: every
/// random multiplicative perturbation of the predictions must not lower it,
/// and must strictly raise it for strictly monotone aggregators (additive,
/// multiplicative, quantile, and L-types with all-positive coefficients).
///
/// Actuals must be strictly positive so every coordinate can move.
pub fn verify_fisher_consistency(
    loss_spec: IndividualLossSpec,
    agg_spec: &AggregatorSpec,
    actuals: &[f64],
    n_trials: u64,
    perturbation_scale: f64,
    seed: u64,
) -> Result<AxiomVerdict, AxiomError> {
    if n_trials == 0 {
        return Err(AxiomError::NoTrials);
    }
    if actuals.is_empty() {
        return Err(AxiomError::TooFewLosses { needed: 1, got: 0 });
    }
    for (index, &value) in actuals.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(AxiomError::NonPositiveActual { index, value });
        }
    }
    if !(perturbation_scale > MIN_PERTURBATION_REL && perturbation_scale.is_finite()) {
        return Err(AxiomError::InvalidPerturbation(format!(
            "perturbation scale must exceed {MIN_PERTURBATION_REL}, got {perturbation_scale}"
        )));
    }

    let total_of = |predictions: &[f64]| -> Result<f64, AxiomError> {
        let mut losses = Vec::with_capacity(actuals.len());
        for (&p, &a) in predictions.iter().zip(actuals) {
            losses.push(eval_loss(loss_spec, PredictionPair::new(p, a)?)?);
        }
        Ok(agg_spec
            .evaluate(&LossVector::new(losses, Vec::new(), loss_spec)?)?
            .value
            .as_f64())
    };

    let baseline = total_of(actuals)?;
    let strict = match &agg_spec.kind {
        AggregatorKind::Additive
        | AggregatorKind::Multiplicative
        | AggregatorKind::Quantile(_) => true,
        AggregatorKind::LType { .. } => {
            agg_spec.kind.all_coefficients_positive() == Some(true)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..n_trials {
        let predictions: Vec<f64> = actuals
            .iter()
            .map(|&a| {
                let magnitude = rng.random_range(MIN_PERTURBATION_REL..=perturbation_scale);
                // Downward moves stay inside the nonnegative domain.
                let down = magnitude < 1.0 && rng.random::<bool>();
                if down {
                    a * (1.0 - magnitude)
                } else {
                    a * (1.0 + magnitude)
                }
            })
            .collect();
        let total = total_of(&predictions)?;
        let ok = if strict {
            strictly_increased(baseline, total)
        } else {
            total >= baseline
        };
        if !ok {
            return Ok(AxiomVerdict::fail(
                Axiom::FisherConsistency,
                trial + 1,
                Some(seed),
                Counterexample {
                    description: format!(
                        "perturbed predictions scored {total}, not above the truth's {baseline}"
                    ),
                    input: actuals.to_vec(),
                    perturbed: predictions,
                    total_before: baseline,
                    total_after: total,
                },
            ));
        }
    }
    Ok(AxiomVerdict::pass(
        Axiom::FisherConsistency,
        n_trials,
        Some(seed),
    ))
}
