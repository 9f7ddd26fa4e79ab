//! Order isomorphism between multiplicative totals of positive losses and
//! additive totals of their logs: comparing products is the same as
//! comparing log sums, in any base greater than 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{aggregate_multiplicative, canonical_sum, AggregateError};
use crate::loss::{IndividualLossSpec, LossError, LossVector};
use crate::verdict::{Axiom, AxiomVerdict, Counterexample};

/// Natural base, the default for log-domain mappings.
pub const NATURAL_BASE: f64 = std::f64::consts::E;

/// Everything below this relative difference counts as a tie when comparing
/// totals across the two domains.
pub const RANK_TIE_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsoError {
    #[error("losses must be strictly positive to map into log space; offending indices {indices:?}")]
    NonPositiveLoss { indices: Vec<usize> },
    #[error("log base must exceed 1, got {0}")]
    InvalidBase(f64),
    #[error("domain mismatch: {0}")]
    TagMismatch(String),
    #[error("rank comparison needs at least two loss sets, got {0}")]
    TooFewSets(usize),
    #[error("shift margin must be positive and finite, got {0}")]
    InvalidMargin(f64),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}

/// Which domain a vector's entries live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    RawLoss,
    LogLoss,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::RawLoss => "raw_loss",
            Domain::LogLoss => "log_loss",
        }
    }
}

/// Domain bookkeeping carried alongside log-mapped values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainTag {
    pub domain: Domain,
    /// Base of the logarithm that produced the entries.
    pub log_base: f64,
    /// Constant added to every loss before the mapping, zero if none.
    pub shift_k: f64,
}

/// A vector of values in a tagged domain. Unlike raw losses, log-domain
/// entries may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedVector {
    values: Vec<f64>,
    tag: DomainTag,
    skipped_units: Vec<String>,
    source_spec: IndividualLossSpec,
}

impl TaggedVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn skipped_units(&self) -> &[String] {
        &self.skipped_units
    }

    pub fn source_spec(&self) -> IndividualLossSpec {
        self.source_spec
    }

    /// Ascending-fold sum of the entries: the additive total in this domain.
    pub fn additive_total(&self) -> f64 {
        canonical_sum(&self.values)
    }
}

fn validate_base(base: f64) -> Result<(), IsoError> {
    if base > 1.0 && base.is_finite() {
        Ok(())
    } else {
        Err(IsoError::InvalidBase(base))
    }
}

fn log_in_base(value: f64, base: f64) -> f64 {
    if base == NATURAL_BASE {
        value.ln()
    } else {
        value.ln() / base.ln()
    }
}

fn exp_in_base(value: f64, base: f64) -> f64 {
    if base == NATURAL_BASE {
        value.exp()
    } else {
        base.powf(value)
    }
}

/// Map strictly positive losses into log space.
pub fn to_log_domain(losses: &LossVector, base: f64) -> Result<TaggedVector, IsoError> {
    validate_base(base)?;
    let nonpositive: Vec<usize> = losses
        .losses()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= 0.0)
        .map(|(i, _)| i)
        .collect();
    if !nonpositive.is_empty() {
        return Err(IsoError::NonPositiveLoss {
            indices: nonpositive,
        });
    }
    Ok(TaggedVector {
        values: losses
            .losses()
            .iter()
            .map(|&l| log_in_base(l, base))
            .collect(),
        tag: DomainTag {
            domain: Domain::LogLoss,
            log_base: base,
            shift_k: 0.0,
        },
        skipped_units: losses.skipped_units().to_vec(),
        source_spec: losses.source_spec(),
    })
}

/// Map log-domain values back to raw losses. The base must match the tag.
pub fn to_exp_domain(tagged: &TaggedVector, base: f64) -> Result<LossVector, IsoError> {
    validate_base(base)?;
    if tagged.tag.domain != Domain::LogLoss {
        return Err(IsoError::TagMismatch(format!(
            "expected log_loss entries, found {}",
            tagged.tag.domain.name()
        )));
    }
    if tagged.tag.log_base != base {
        return Err(IsoError::TagMismatch(format!(
            "entries were logged in base {}, cannot exponentiate in base {base}",
            tagged.tag.log_base
        )));
    }
    let values: Vec<f64> = tagged
        .values
        .iter()
        .map(|&v| exp_in_base(v, base))
        .collect();
    Ok(LossVector::new(
        values,
        tagged.skipped_units.clone(),
        tagged.source_spec,
    )?)
}

/// Add a constant to every loss so the minimum lands at `margin`.
///
/// The shift k is `margin - min` when the minimum falls below `margin`,
/// otherwise zero; the shifted vector is always safe to log. Returns the
/// shifted vector and k.
pub fn shift_positive(losses: &LossVector, margin: f64) -> Result<(LossVector, f64), IsoError> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(IsoError::InvalidMargin(margin));
    }
    let min = losses
        .losses()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let k = if min < margin { margin - min } else { 0.0 };
    let shifted = losses.with_losses(losses.losses().iter().map(|&l| l + k).collect())?;
    Ok((shifted, k))
}

/// Shift if needed, then map into log space, recording the shift in the tag.
pub fn to_log_domain_shifted(
    losses: &LossVector,
    base: f64,
    margin: f64,
) -> Result<TaggedVector, IsoError> {
    let (shifted, k) = shift_positive(losses, margin)?;
    let mut tagged = to_log_domain(&shifted, base)?;
    tagged.tag.shift_k = k;
    Ok(tagged)
}

fn compare_with_tie(a: f64, b: f64, rel: f64) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if a.is_finite() && b.is_finite() {
        if (a - b).abs() <= rel * a.abs().max(b.abs()) {
            return Ordering::Equal;
        }
    } else if a == b {
        return Ordering::Equal;
    }
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Check that ranking loss sets by multiplicative total agrees with ranking
/// them by additive total of natural logs, treating relative differences
/// below [`RANK_TIE_REL`] as ties in both domains.
///
/// Every set must be strictly positive; set lengths may differ.
pub fn check_rank_preservation(loss_sets: &[LossVector]) -> Result<AxiomVerdict, IsoError> {
    if loss_sets.len() < 2 {
        return Err(IsoError::TooFewSets(loss_sets.len()));
    }
    let mut products = Vec::with_capacity(loss_sets.len());
    let mut log_sums = Vec::with_capacity(loss_sets.len());
    for set in loss_sets {
        let tagged = to_log_domain(set, NATURAL_BASE)?;
        log_sums.push(tagged.additive_total());
        products.push(aggregate_multiplicative(set)?.value.as_f64());
    }
    let mut pairs: u64 = 0;
    for i in 0..loss_sets.len() {
        for j in i + 1..loss_sets.len() {
            pairs += 1;
            let by_product = compare_with_tie(products[i], products[j], RANK_TIE_REL);
            let by_log_sum = compare_with_tie(log_sums[i], log_sums[j], RANK_TIE_REL);
            if by_product != by_log_sum {
                return Ok(AxiomVerdict::fail(
                    Axiom::RankIsomorphism,
                    pairs,
                    None,
                    Counterexample {
                        description: format!(
                            "sets {i} and {j} rank {by_product:?} by product but {by_log_sum:?} by log sum ({} vs {})",
                            log_sums[i], log_sums[j]
                        ),
                        input: loss_sets[i].losses().to_vec(),
                        perturbed: loss_sets[j].losses().to_vec(),
                        total_before: products[i],
                        total_after: products[j],
                    },
                ));
            }
        }
    }
    Ok(AxiomVerdict::pass(Axiom::RankIsomorphism, pairs, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::VerdictStatus;
    use proptest::prelude::*;

    fn vector(losses: &[f64]) -> LossVector {
        LossVector::from_losses(losses.to_vec()).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn log_domain_matches_hand_values() {
        let tagged = to_log_domain(&vector(&[1.0, std::f64::consts::E]), NATURAL_BASE).unwrap();
        assert_eq!(tagged.values()[0], 0.0);
        assert!(rel_close(tagged.values()[1], 1.0, 1e-12));
        assert_eq!(tagged.tag().domain, Domain::LogLoss);
        assert_eq!(tagged.tag().shift_k, 0.0);

        let base2 = to_log_domain(&vector(&[8.0]), 2.0).unwrap();
        assert!(rel_close(base2.values()[0], 3.0, 1e-12));

        let base10 = to_log_domain(&vector(&[100.0]), 10.0).unwrap();
        assert!(rel_close(base10.values()[0], 2.0, 1e-12));
    }

    #[test]
    fn log_domain_entries_may_be_negative() {
        let tagged = to_log_domain(&vector(&[0.5]), NATURAL_BASE).unwrap();
        assert!(tagged.values()[0] < 0.0);
    }

    #[test]
    fn zero_loss_cannot_be_logged() {
        let err = to_log_domain(&vector(&[4.0, 0.0, 9.0]), NATURAL_BASE).unwrap_err();
        assert_eq!(err, IsoError::NonPositiveLoss { indices: vec![1] });
    }

    #[test]
    fn invalid_bases_are_rejected() {
        for base in [1.0, 0.5, -2.0, f64::NAN] {
            assert!(matches!(
                to_log_domain(&vector(&[1.0]), base),
                Err(IsoError::InvalidBase(_))
            ));
        }
    }

    #[test]
    fn exp_domain_requires_a_matching_tag() {
        let tagged = to_log_domain(&vector(&[2.0, 3.0]), 2.0).unwrap();
        assert!(matches!(
            to_exp_domain(&tagged, 10.0),
            Err(IsoError::TagMismatch(_))
        ));
        let back = to_exp_domain(&tagged, 2.0).unwrap();
        assert!(rel_close(back.losses()[0], 2.0, 1e-12));
        assert!(rel_close(back.losses()[1], 3.0, 1e-12));
    }

    #[test]
    fn shift_positive_matches_hand_values() {
        let (shifted, k) = shift_positive(&vector(&[0.0, 5.0, 10.0]), 1.0).unwrap();
        assert_eq!(k, 1.0);
        assert_eq!(shifted.losses(), &[1.0, 6.0, 11.0]);

        let (unshifted, k) = shift_positive(&vector(&[2.0, 3.0]), 1.0).unwrap();
        assert_eq!(k, 0.0);
        assert_eq!(unshifted.losses(), &[2.0, 3.0]);

        let (shifted, k) = shift_positive(&vector(&[0.0, 0.0]), 0.5).unwrap();
        assert_eq!(k, 0.5);
        assert_eq!(shifted.losses(), &[0.5, 0.5]);
    }

    #[test]
    fn shift_rejects_bad_margins() {
        for margin in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                shift_positive(&vector(&[1.0]), margin),
                Err(IsoError::InvalidMargin(_))
            ));
        }
    }

    #[test]
    fn shifted_log_domain_records_k_in_the_tag() {
        let tagged = to_log_domain_shifted(&vector(&[0.0, 3.0]), NATURAL_BASE, 1.0).unwrap();
        assert_eq!(tagged.tag().shift_k, 1.0);
        assert_eq!(tagged.values()[0], 0.0);
        assert!(rel_close(tagged.values()[1], 4.0f64.ln(), 1e-12));
    }

    #[test]
    fn rank_preservation_passes_on_hand_examples() {
        let sets = [vector(&[1.0, 2.0, 3.0]), vector(&[2.0, 2.0, 2.0])];
        let verdict = check_rank_preservation(&sets).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Pass);
        assert_eq!(verdict.trials, 1);

        // Products 2 vs 2.25 disagree with the raw additive totals, which
        // tie at 3; the log-sum ordering still matches the products.
        let sets = [vector(&[1.0, 2.0]), vector(&[1.5, 1.5])];
        let verdict = check_rank_preservation(&sets).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Pass);
        let raw_additive_a = canonical_sum(&[1.0, 2.0]);
        let raw_additive_b = canonical_sum(&[1.5, 1.5]);
        assert_eq!(raw_additive_a, raw_additive_b);
    }

    #[test]
    fn rank_preservation_needs_positive_sets() {
        let sets = [vector(&[1.0, 0.0]), vector(&[1.0, 2.0])];
        assert!(matches!(
            check_rank_preservation(&sets),
            Err(IsoError::NonPositiveLoss { .. })
        ));
    }

    #[test]
    fn rank_preservation_needs_two_sets() {
        assert_eq!(
            check_rank_preservation(&[vector(&[1.0])]).unwrap_err(),
            IsoError::TooFewSets(1)
        );
    }

    #[test]
    fn product_degeneracy_and_log_rejection_coincide() {
        let with_zero = vector(&[4.0, 0.0, 9.0]);
        let product = aggregate_multiplicative(&with_zero).unwrap();
        assert!(product.degenerate);
        assert!(to_log_domain(&with_zero, NATURAL_BASE).is_err());

        let positive = vector(&[4.0, 1.0, 9.0]);
        let product = aggregate_multiplicative(&positive).unwrap();
        assert!(!product.degenerate);
        assert!(to_log_domain(&positive, NATURAL_BASE).is_ok());
    }

    proptest! {
        #[test]
        fn round_trip_recovers_losses(
            losses in proptest::collection::vec(1e-6..1e6f64, 1..50),
            base in prop_oneof![
                Just(NATURAL_BASE),
                Just(2.0),
                Just(10.0),
            ],
        ) {
            let original = vector(&losses);
            let tagged = to_log_domain(&original, base).unwrap();
            let back = to_exp_domain(&tagged, base).unwrap();
            for (&a, &b) in original.losses().iter().zip(back.losses()) {
                prop_assert!(rel_close(a, b, 1e-12));
            }
        }

        #[test]
        fn log_sum_equals_log_of_product(
            losses in proptest::collection::vec(0.5..2.0f64, 1..20),
        ) {
            let v = vector(&losses);
            let product = aggregate_multiplicative(&v).unwrap().value.as_f64();
            let log_sum = to_log_domain(&v, NATURAL_BASE).unwrap().additive_total();
            prop_assert!(rel_close(log_sum.exp(), product, 1e-9));
        }

        #[test]
        fn base_choice_never_flips_an_ordering(
            a in proptest::collection::vec(0.1..10.0f64, 2..12),
            b in proptest::collection::vec(0.1..10.0f64, 2..12),
        ) {
            let (va, vb) = (vector(&a), vector(&b));
            let mut orderings = Vec::new();
            for base in [NATURAL_BASE, 2.0, 10.0] {
                let sa = to_log_domain(&va, base).unwrap().additive_total();
                let sb = to_log_domain(&vb, base).unwrap().additive_total();
                orderings.push(compare_with_tie(sa, sb, 1e-9));
            }
            prop_assert!(orderings.windows(2).all(|w| w[0] == w[1]));
        }

        #[test]
        fn shift_never_produces_nonpositive_entries(
            losses in proptest::collection::vec(0.0..100.0f64, 1..30),
            margin in 0.01..5.0f64,
        ) {
            let (shifted, k) = shift_positive(&vector(&losses), margin).unwrap();
            prop_assert!(k >= 0.0);
            for &l in shifted.losses() {
                prop_assert!(l > 0.0);
            }
            prop_assert!(to_log_domain(&shifted, NATURAL_BASE).is_ok());
        }

        #[test]
        fn random_pairs_preserve_rank(
            a in proptest::collection::vec(0.05..20.0f64, 2..15),
            b in proptest::collection::vec(0.05..20.0f64, 2..15),
        ) {
            let verdict = check_rank_preservation(&[vector(&a), vector(&b)]).unwrap();
            prop_assert_eq!(verdict.status, VerdictStatus::Pass);
        }
    }
}
