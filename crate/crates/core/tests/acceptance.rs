//! Acceptance checks for the aggregation library. Each test covers one
//! criterion end to end against independent oracles and prints one
//! pass/fail line. Tolerances are pinned here, next to the checks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tloss_core::aggregate::{
    aggregate_additive, aggregate_ltype, aggregate_multiplicative, aggregate_quantile,
    quantile_rank, AggregatorKind, AggregatorSpec, PresetMetric, SortOrder, TotalValue,
};
use tloss_core::axiom::{
    ltype_blind_spot_counterexample, quantile_blind_spot_counterexample, verify_anonymity,
    verify_fisher_consistency, verify_total_monotonicity, AxiomError, Perturbation,
};
use tloss_core::isomorphism::{to_log_domain, NATURAL_BASE};
use tloss_core::loss::{IndividualLossSpec, LossKind, LossVector, PredictionRecord};
use tloss_core::verdict::VerdictStatus;

/// Relative tolerance for values computed along different algebraic routes.
const ORACLE_REL_TOL: f64 = 1e-9;
/// Relative tolerance for values computed along the same route.
const STRICT_REL_TOL: f64 = 1e-12;
/// Ties closer than this, relatively, when comparing rankings.
const RANK_TIE_REL: f64 = 1e-9;

fn report(criterion: &str, ok: bool) {
    println!("acceptance: {criterion}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion failed: {criterion}");
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn vector(values: Vec<f64>) -> LossVector {
    LossVector::from_losses(values).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> LossVector {
    vector((0..n).map(|_| rng.random_range(lo..hi)).collect())
}

#[test]
fn perfect_prediction_collapses_gmape_to_exact_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x47_4d_41_50);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(2..30);
        let perfect_at = rng.random_range(0..n);
        let records: Vec<PredictionRecord> = (0..n)
            .map(|i| {
                let actual = rng.random_range(1.0..1000.0);
                let prediction = if i == perfect_at {
                    actual
                } else {
                    actual * rng.random_range(0.5..1.5)
                };
                PredictionRecord::new(format!("u{i}"), actual).with_prediction("p", prediction)
            })
            .collect();
        let result =
            tloss_core::aggregate::preset_metric(PresetMetric::Gmape, &records, "p").unwrap();
        let exact_zero = matches!(result.value, TotalValue::Finite(v) if v.to_bits() == 0.0f64.to_bits());
        if !(exact_zero && result.degenerate) {
            ok = false;
            break;
        }
    }
    report("gmape is exactly zero under any perfect prediction (100 variants)", ok);
}

#[test]
fn quantile_totals_ignore_raises_above_the_selected_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c_45_4d_31);
    let mut ok = true;
    for q in [0.25, 0.5, 0.9] {
        let mut constructed = 0u32;
        let mut premise_violations = 0u32;
        for _ in 0..1000 {
            let n = rng.random_range(5..=100);
            let losses = random_vector(&mut rng, n, 0.01, 100.0);
            match quantile_blind_spot_counterexample(q, &losses) {
                Ok(cx) => {
                    constructed += 1;
                    if cx.total_before.to_bits() != cx.total_after.to_bits() {
                        ok = false;
                    }
                }
                // ceil(q * n) = n puts the selected rank at the maximum
                // itself; the construction must refuse, not fabricate.
                Err(AxiomError::QuantileAtMaximum { .. }) => {
                    if quantile_rank(q, losses.len()) != losses.len() {
                        ok = false;
                    }
                    premise_violations += 1;
                }
                Err(_) => ok = false,
            }
        }
        if constructed == 0 {
            ok = false;
        }
        // q = 0.9 has ranks at the top for n in 5..=9, so both paths must
        // show up across 1000 draws of n in 5..=100.
        if q == 0.9 && premise_violations == 0 {
            ok = false;
        }
        if q != 0.9 && premise_violations != 0 {
            ok = false;
        }
    }
    // q = 1: a raise strictly below the maximum is invisible to the max.
    for _ in 0..1000 {
        let n = rng.random_range(5..=100);
        let losses = random_vector(&mut rng, n, 0.01, 100.0);
        let max = losses.losses().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match quantile_blind_spot_counterexample(1.0, &losses) {
            Ok(cx) => {
                if cx.total_before.to_bits() != cx.total_after.to_bits()
                    || cx.total_before != max
                {
                    ok = false;
                }
            }
            Err(_) => ok = false,
        }
    }
    report(
        "quantile totals are blind to raises away from the selected rank (4000 constructions)",
        ok,
    );
}

#[test]
fn ltype_totals_ignore_raises_at_zero_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x43_4f_52_31);
    let mut ok = true;
    for _ in 0..1000 {
        let n = rng.random_range(2..40);
        let losses = random_vector(&mut rng, n, 0.01, 100.0);
        let mut coefficients: Vec<f64> =
            (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let zeros = rng.random_range(1..=n);
        for slot in rand::seq::index::sample(&mut rng, n, zeros) {
            coefficients[slot] = 0.0;
        }
        let order = if rng.random::<bool>() {
            SortOrder::Ascending
        } else {
            SortOrder::Descending
        };
        match ltype_blind_spot_counterexample(&coefficients, order, &losses) {
            Ok(cx) => {
                if cx.total_before.to_bits() != cx.total_after.to_bits() {
                    ok = false;
                }
            }
            Err(_) => ok = false,
        }
    }
    // All-positive coefficients leave no blind spot: every single-loss
    // raise strictly increases the total.
    for _ in 0..1000 {
        let n = rng.random_range(2..40);
        let losses = random_vector(&mut rng, n, 0.01, 100.0);
        let coefficients: Vec<f64> =
            (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let spec = AggregatorSpec::new(AggregatorKind::LType {
            coefficients,
            order: SortOrder::Ascending,
        });
        let perturbation = Perturbation::Delta {
            index: rng.random_range(0..n),
            delta: rng.random_range(0.01..10.0),
        };
        let verdict = verify_total_monotonicity(&spec, &losses, &[perturbation]).unwrap();
        if verdict.status != VerdictStatus::Pass {
            ok = false;
        }
    }
    report(
        "zero-coefficient weighted sums have blind spots, all-positive ones do not (2000 trials)",
        ok,
    );
}

#[test]
fn log_domain_sums_rank_exactly_like_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x49_53_4f_4d);
    let mut ok = true;
    let compare = |a: f64, b: f64| -> i8 {
        if (a - b).abs() <= RANK_TIE_REL * a.abs().max(b.abs()) {
            0
        } else if a < b {
            -1
        } else {
            1
        }
    };
    for _ in 0..1000 {
        let n_a = rng.random_range(2..15);
        let n_b = rng.random_range(2..15);
        let a = random_vector(&mut rng, n_a, 0.05, 20.0);
        let b = random_vector(&mut rng, n_b, 0.05, 20.0);
        let product_a = aggregate_multiplicative(&a).unwrap().value.as_f64();
        let product_b = aggregate_multiplicative(&b).unwrap().value.as_f64();
        let by_product = compare(product_a, product_b);
        for base in [NATURAL_BASE, 2.0, 10.0] {
            let sum_a = to_log_domain(&a, base).unwrap().additive_total();
            let sum_b = to_log_domain(&b, base).unwrap().additive_total();
            if compare(sum_a, sum_b) != by_product {
                ok = false;
            }
        }
        // The natural-base sum also reproduces the product itself.
        let log_sum = to_log_domain(&a, NATURAL_BASE).unwrap().additive_total();
        if !rel_close(log_sum.exp(), product_a, ORACLE_REL_TOL) {
            ok = false;
        }
    }
    report(
        "rankings by product match rankings by log sum in bases e, 2, 10 (1000 pairs)",
        ok,
    );
}

#[test]
fn predicting_the_truth_minimizes_every_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x46_49_53_48);
    let actuals: Vec<f64> = (0..20).map(|_| rng.random_range(1.0..500.0)).collect();
    let coefficients: Vec<f64> = (0..20).map(|_| rng.random_range(0.1..3.0)).collect();
    let specs = [
        AggregatorSpec::new(AggregatorKind::Additive),
        AggregatorSpec::new(AggregatorKind::Multiplicative),
        AggregatorSpec::new(AggregatorKind::Quantile(0.5)),
        AggregatorSpec::new(AggregatorKind::Quantile(1.0)),
        AggregatorSpec::new(AggregatorKind::LType {
            coefficients,
            order: SortOrder::Ascending,
        }),
    ];
    let mut ok = true;
    for kind in [LossKind::AbsolutePercentageError, LossKind::SquaredError] {
        for spec in &specs {
            let verdict = verify_fisher_consistency(
                IndividualLossSpec::new(kind),
                spec,
                &actuals,
                10_000,
                0.5,
                0xf15c0de,
            )
            .unwrap();
            if verdict.status != VerdictStatus::Pass {
                ok = false;
            }
        }
    }
    report(
        "the truth scores strictly below 10^4 perturbed predictions per aggregator, n = 20",
        ok,
    );
}

#[test]
fn permutations_never_change_a_total_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x41_4e_4f_4e);
    let mut ok = true;
    for trial in 0..100 {
        let n = rng.random_range(2..50);
        let losses = random_vector(&mut rng, n, 0.0, 100.0);
        let positive = random_vector(&mut rng, n, 0.01, 100.0);
        let coefficients: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let specs = [
            (AggregatorSpec::new(AggregatorKind::Additive), &losses),
            (AggregatorSpec::new(AggregatorKind::Multiplicative), &positive),
            (AggregatorSpec::new(AggregatorKind::Quantile(0.5)), &losses),
            (AggregatorSpec::new(AggregatorKind::Quantile(1.0)), &losses),
            (
                AggregatorSpec::new(AggregatorKind::LType {
                    coefficients,
                    order: SortOrder::Descending,
                }),
                &losses,
            ),
        ];
        for (spec, input) in specs {
            let verdict = verify_anonymity(&spec, input, 100, 0xa0_0a ^ trial).unwrap();
            if verdict.status != VerdictStatus::Pass {
                ok = false;
            }
        }
    }
    report("totals are bit-identical across 100 vectors x 100 permutations", ok);
}

#[test]
fn structural_identities_hold_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x53_54_52_55);
    let mut ok = true;
    for _ in 0..200 {
        let n = rng.random_range(1..30);
        let losses = random_vector(&mut rng, n, 0.0, 100.0);

        // A weighted sum with unit coefficients is the plain sum.
        let unit = aggregate_ltype(&losses, &vec![1.0; n], SortOrder::Ascending)
            .unwrap()
            .value
            .as_f64();
        let additive = aggregate_additive(&losses).unwrap().value.as_f64();
        if unit.to_bits() != additive.to_bits() {
            ok = false;
        }

        // A single unit coefficient at rank ceil(q * n) selects the quantile.
        for q in [0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
            let mut selector = vec![0.0; n];
            selector[quantile_rank(q, n) - 1] = 1.0;
            let picked = aggregate_ltype(&losses, &selector, SortOrder::Ascending)
                .unwrap()
                .value
                .as_f64();
            let quantile = aggregate_quantile(&losses, q).unwrap().value.as_f64();
            if picked.to_bits() != quantile.to_bits() {
                ok = false;
            }
        }

        // The q = 1 quantile is the maximum.
        let top = aggregate_quantile(&losses, 1.0).unwrap().value.as_f64();
        let max = losses.losses().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top.to_bits() != max.to_bits() {
            ok = false;
        }
    }
    report(
        "unit-coefficient, selector, and max structural identities are bitwise (200 vectors)",
        ok,
    );
}

#[test]
fn aggregates_match_independent_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4f_52_41_43);
    let mut ok = true;
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let losses = random_vector(&mut rng, n, 0.5, 2.0);
        let values = losses.losses();

        let naive_sum: f64 = values.iter().sum();
        let additive = aggregate_additive(&losses).unwrap().value.as_f64();
        if !rel_close(additive, naive_sum, STRICT_REL_TOL) {
            ok = false;
        }

        let naive_product: f64 = values.iter().product();
        let multiplicative = aggregate_multiplicative(&losses).unwrap().value.as_f64();
        if !rel_close(multiplicative, naive_product, ORACLE_REL_TOL) {
            ok = false;
        }

        let q = rng.random_range(0.01..=1.0);
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let oracle_rank = ((q * n as f64).ceil() as usize).max(1).min(n);
        let quantile = aggregate_quantile(&losses, q).unwrap().value.as_f64();
        if quantile.to_bits() != sorted[oracle_rank - 1].to_bits() {
            ok = false;
        }

        let coefficients: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let mut oracle_ltype = 0.0;
        for (i, c) in coefficients.iter().enumerate() {
            oracle_ltype += c * sorted[i];
        }
        let ltype = aggregate_ltype(&losses, &coefficients, SortOrder::Ascending)
            .unwrap()
            .value
            .as_f64();
        if !rel_close(ltype, oracle_ltype, STRICT_REL_TOL) {
            ok = false;
        }
    }
    report(
        "aggregates agree with brute-force oracles for n <= 20, losses in [0.5, 2] (1000 vectors)",
        ok,
    );
}
