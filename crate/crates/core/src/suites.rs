//! Named verification suites. Each suite bundles checks with the outcome
//! they are expected to produce: well-behaved aggregators must pass, and
//! the known blind spots must reproducibly fail.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::{AggregatorKind, AggregatorSpec, SortOrder};
use crate::axiom::{
    ltype_blind_spot_counterexample, quantile_blind_spot_counterexample, verify_anonymity,
    verify_fisher_consistency, verify_total_monotonicity, AxiomError, Perturbation,
};
use crate::isomorphism::{check_rank_preservation, to_log_domain, IsoError, NATURAL_BASE};
use crate::loss::{
    check_pointwise_monotonicity, IndividualLossSpec, LossKind, LossVector,
};
use crate::verdict::{Axiom, AxiomVerdict, Counterexample, VerdictStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Anonymity,
    Pointwise,
    Monotonicity,
    QuantileBlindSpot,
    LtypeBlindSpot,
    Isomorphism,
    Fisher,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Anonymity,
        Suite::Pointwise,
        Suite::Monotonicity,
        Suite::QuantileBlindSpot,
        Suite::LtypeBlindSpot,
        Suite::Isomorphism,
        Suite::Fisher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Anonymity => "anonymity",
            Suite::Pointwise => "pointwise",
            Suite::Monotonicity => "monotonicity",
            Suite::QuantileBlindSpot => "quantile-blind-spot",
            Suite::LtypeBlindSpot => "ltype-blind-spot",
            Suite::Isomorphism => "isomorphism",
            Suite::Fisher => "fisher",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }
}

/// One executed check: where it ran, what it expected, what it saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub suite: String,
    pub check: String,
    pub expected: VerdictStatus,
    pub verdict: AxiomVerdict,
}

impl SuiteCheck {
    pub fn as_expected(&self) -> bool {
        self.verdict.status == self.expected
    }
}

struct Ctx {
    rng: ChaCha8Rng,
    seed: u64,
    trials: u64,
    checks: Vec<SuiteCheck>,
}

impl Ctx {
    fn losses(&mut self, n: usize) -> LossVector {
        let values: Vec<f64> = (0..n)
            .map(|_| self.rng.random_range(0.05..10.0))
            .collect();
        LossVector::from_losses(values).expect("draws are finite and positive")
    }

    fn push(
        &mut self,
        suite: Suite,
        check: &str,
        expected: VerdictStatus,
        verdict: AxiomVerdict,
    ) {
        self.checks.push(SuiteCheck {
            suite: suite.name().to_owned(),
            check: check.to_owned(),
            expected,
            verdict,
        });
    }

}

/// Merge per-trial verdicts: the first failure wins, otherwise one pass
/// accumulating every trial.
fn merge_pass(axiom: Axiom, verdicts: Vec<AxiomVerdict>, seed: u64) -> AxiomVerdict {
    let total: u64 = verdicts.iter().map(|v| v.trials).sum();
    match verdicts.into_iter().find(|v| !v.passed()) {
        Some(failed) => failed,
        None => AxiomVerdict::pass(axiom, total.max(1), Some(seed)),
    }
}

/// Turn a stream of constructed counterexamples into one Fail verdict,
/// keeping the first witness.
fn merge_fail(
    axiom: Axiom,
    counterexamples: Vec<Counterexample>,
    seed: u64,
) -> AxiomVerdict {
    let trials = counterexamples.len() as u64;
    let first = counterexamples
        .into_iter()
        .next()
        .expect("at least one counterexample");
    AxiomVerdict::fail(axiom, trials.max(1), Some(seed), first)
}

fn standard_specs(n: usize, rng: &mut ChaCha8Rng) -> Vec<(String, AggregatorSpec)> {
    let positive: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    vec![
        ("additive".to_owned(), AggregatorSpec::new(AggregatorKind::Additive)),
        (
            "multiplicative".to_owned(),
            AggregatorSpec::new(AggregatorKind::Multiplicative),
        ),
        (
            "quantile:0.5".to_owned(),
            AggregatorSpec::new(AggregatorKind::Quantile(0.5)),
        ),
        (
            "quantile:1".to_owned(),
            AggregatorSpec::new(AggregatorKind::Quantile(1.0)),
        ),
        (
            "ltype-positive".to_owned(),
            AggregatorSpec::new(AggregatorKind::LType {
                coefficients: positive,
                order: SortOrder::Ascending,
            }),
        ),
    ]
}

fn run_anonymity(ctx: &mut Ctx) -> Result<(), AxiomError> {
    let n = ctx.rng.random_range(5..25);
    let losses = ctx.losses(n);
    let specs = standard_specs(n, &mut ctx.rng);
    let permutations_per_vector = 20;
    for (name, spec) in specs {
        let mut verdicts = Vec::new();
        for t in 0..ctx.trials {
            let verdict =
                verify_anonymity(&spec, &losses, permutations_per_vector, ctx.seed ^ t)?;
            verdicts.push(verdict);
        }
        let merged = merge_pass(Axiom::Anonymity, verdicts, ctx.seed);
        ctx.push(Suite::Anonymity, &name, VerdictStatus::Pass, merged);
    }
    Ok(())
}

fn run_pointwise(ctx: &mut Ctx) -> Result<(), AxiomError> {
    for kind in LossKind::ALL {
        let mut verdicts = Vec::new();
        for _ in 0..ctx.trials {
            let actual = ctx.rng.random_range(0.5..500.0);
            let spread = ctx.rng.random_range(0.05..0.8);
            let grid = [
                actual * (1.0 - spread),
                actual * (1.0 - spread / 2.0),
                actual,
                actual * (1.0 + spread / 2.0),
                actual * (1.0 + spread),
            ];
            verdicts.push(check_pointwise_monotonicity(
                IndividualLossSpec::new(kind),
                actual,
                &grid,
            )?);
        }
        let merged = merge_pass(Axiom::PointwiseMonotonicity, verdicts, ctx.seed);
        ctx.push(Suite::Pointwise, kind.short_name(), VerdictStatus::Pass, merged);
    }
    Ok(())
}

type SpecDraw = fn(usize, &mut ChaCha8Rng) -> AggregatorSpec;

fn run_monotonicity(ctx: &mut Ctx) -> Result<(), AxiomError> {
    // Strict aggregators must pass under arbitrary single-loss raises.
    let strict: [(&str, SpecDraw); 3] = [
        ("additive", |_, _| AggregatorSpec::new(AggregatorKind::Additive)),
        ("multiplicative", |_, _| {
            AggregatorSpec::new(AggregatorKind::Multiplicative)
        }),
        ("ltype-positive", |n, rng| {
            AggregatorSpec::new(AggregatorKind::LType {
                coefficients: (0..n).map(|_| rng.random_range(0.1..3.0)).collect(),
                order: SortOrder::Ascending,
            })
        }),
    ];
    for (name, make_spec) in strict {
        let mut verdicts = Vec::new();
        for _ in 0..ctx.trials {
            let n = ctx.rng.random_range(2..20);
            let losses = ctx.losses(n);
            let spec = make_spec(n, &mut ctx.rng);
            let index = ctx.rng.random_range(0..n);
            let delta = ctx.rng.random_range(0.1..2.0);
            verdicts.push(verify_total_monotonicity(
                &spec,
                &losses,
                &[Perturbation::Delta { index, delta }],
            )?);
        }
        let merged = merge_pass(Axiom::TotalMonotonicity, verdicts, ctx.seed);
        ctx.push(Suite::Monotonicity, name, VerdictStatus::Pass, merged);
    }

    // The median must ignore a raise of the maximum, every time.
    let mut witnesses = Vec::new();
    for _ in 0..ctx.trials {
        let n = ctx.rng.random_range(2..20);
        let losses = ctx.losses(n);
        let max_index = losses
            .losses()
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.total_cmp(b))
            .map(|(i, _)| i)
            .expect("vector is nonempty");
        let verdict = verify_total_monotonicity(
            &AggregatorSpec::new(AggregatorKind::Quantile(0.5)),
            &losses,
            &[Perturbation::Delta {
                index: max_index,
                delta: 1.0,
            }],
        )?;
        match verdict.counterexample {
            Some(cx) if verdict.status == VerdictStatus::Fail => witnesses.push(cx),
            _ => {
                ctx.push(
                    Suite::Monotonicity,
                    "quantile:0.5-ignores-max",
                    VerdictStatus::Fail,
                    verdict,
                );
                return Ok(());
            }
        }
    }
    let merged = merge_fail(Axiom::TotalMonotonicity, witnesses, ctx.seed);
    ctx.push(
        Suite::Monotonicity,
        "quantile:0.5-ignores-max",
        VerdictStatus::Fail,
        merged,
    );
    Ok(())
}

fn run_quantile_blind_spot(ctx: &mut Ctx) -> Result<(), AxiomError> {
    for q in [0.25, 0.5, 0.9, 1.0] {
        let mut witnesses = Vec::new();
        for _ in 0..ctx.trials {
            // Keep the selected rank strictly below the top for q < 1.
            let n = loop {
                let n = ctx.rng.random_range(2..40);
                if q >= 1.0 || crate::aggregate::quantile_rank(q, n) < n {
                    break n;
                }
            };
            let losses = ctx.losses(n);
            match quantile_blind_spot_counterexample(q, &losses) {
                Ok(cx) => {
                    if cx.total_before.to_bits() != cx.total_after.to_bits() {
                        let verdict = AxiomVerdict::pass(
                            Axiom::TotalMonotonicity,
                            1,
                            Some(ctx.seed),
                        );
                        ctx.push(
                            Suite::QuantileBlindSpot,
                            &format!("q={q}"),
                            VerdictStatus::Fail,
                            verdict,
                        );
                        return Ok(());
                    }
                    witnesses.push(cx);
                }
                Err(AxiomError::NoNonMaximalLoss) => continue,
                Err(other) => return Err(other),
            }
        }
        let merged = merge_fail(Axiom::TotalMonotonicity, witnesses, ctx.seed);
        ctx.push(
            Suite::QuantileBlindSpot,
            &format!("q={q}"),
            VerdictStatus::Fail,
            merged,
        );
    }
    Ok(())
}

fn run_ltype_blind_spot(ctx: &mut Ctx) -> Result<(), AxiomError> {
    for order in [SortOrder::Ascending, SortOrder::Descending] {
        let name = match order {
            SortOrder::Ascending => "zero-coefficient-ascending",
            SortOrder::Descending => "zero-coefficient-descending",
        };
        let mut witnesses = Vec::new();
        for _ in 0..ctx.trials {
            let n = ctx.rng.random_range(2..20);
            let losses = ctx.losses(n);
            let mut coefficients: Vec<f64> =
                (0..n).map(|_| ctx.rng.random_range(0.1..3.0)).collect();
            let zero_at = ctx.rng.random_range(0..n);
            coefficients[zero_at] = 0.0;
            match ltype_blind_spot_counterexample(&coefficients, order, &losses) {
                Ok(cx) => {
                    if cx.total_before.to_bits() != cx.total_after.to_bits() {
                        let verdict = AxiomVerdict::pass(
                            Axiom::TotalMonotonicity,
                            1,
                            Some(ctx.seed),
                        );
                        ctx.push(Suite::LtypeBlindSpot, name, VerdictStatus::Fail, verdict);
                        return Ok(());
                    }
                    witnesses.push(cx);
                }
                Err(AxiomError::NoSlackAtZeroCoefficient) => continue,
                Err(other) => return Err(other),
            }
        }
        let merged = merge_fail(Axiom::TotalMonotonicity, witnesses, ctx.seed);
        ctx.push(Suite::LtypeBlindSpot, name, VerdictStatus::Fail, merged);
    }
    Ok(())
}

fn run_isomorphism(ctx: &mut Ctx) -> Result<(), AxiomError> {
    let mut verdicts = Vec::new();
    for _ in 0..ctx.trials {
        let n_sets = ctx.rng.random_range(2..5);
        let sets: Vec<LossVector> = (0..n_sets)
            .map(|_| {
                let n = ctx.rng.random_range(2..15);
                ctx.losses(n)
            })
            .collect();
        let verdict = check_rank_preservation(&sets).map_err(iso_to_axiom)?;
        verdicts.push(verdict);
    }
    let merged = merge_pass(Axiom::RankIsomorphism, verdicts, ctx.seed);
    ctx.push(
        Suite::Isomorphism,
        "rank-preservation",
        VerdictStatus::Pass,
        merged,
    );

    // A zero loss must collapse the product and be rejected by the log map.
    let mut trials_run = 0;
    for _ in 0..ctx.trials {
        let n = ctx.rng.random_range(2..15);
        let mut values = ctx.losses(n).losses().to_vec();
        values[ctx.rng.random_range(0..n)] = 0.0;
        let vector = LossVector::from_losses(values).expect("zeros are valid losses");
        let product = crate::aggregate::aggregate_multiplicative(&vector)?;
        let log_rejects = to_log_domain(&vector, NATURAL_BASE).is_err();
        trials_run += 1;
        if !(product.degenerate && log_rejects) {
            let verdict = AxiomVerdict::fail(
                Axiom::RankIsomorphism,
                trials_run,
                Some(ctx.seed),
                Counterexample {
                    description:
                        "a zero loss did not produce matching degeneracy signals in the two domains"
                            .to_owned(),
                    input: vector.losses().to_vec(),
                    perturbed: vector.losses().to_vec(),
                    total_before: product.value.as_f64(),
                    total_after: f64::NEG_INFINITY,
                },
            );
            ctx.push(
                Suite::Isomorphism,
                "degeneracy-signal",
                VerdictStatus::Pass,
                verdict,
            );
            return Ok(());
        }
    }
    ctx.push(
        Suite::Isomorphism,
        "degeneracy-signal",
        VerdictStatus::Pass,
        AxiomVerdict::pass(Axiom::RankIsomorphism, trials_run.max(1), Some(ctx.seed)),
    );
    Ok(())
}

fn iso_to_axiom(err: IsoError) -> AxiomError {
    match err {
        IsoError::Loss(e) => AxiomError::Loss(e),
        IsoError::Aggregate(e) => AxiomError::Aggregate(e),
        other => AxiomError::InvalidPerturbation(other.to_string()),
    }
}

fn run_fisher(ctx: &mut Ctx) -> Result<(), AxiomError> {
    let kinds = [
        LossKind::AbsolutePercentageError,
        LossKind::SquaredError,
    ];
    for kind in kinds {
        let n = 10;
        let actuals: Vec<f64> = (0..n)
            .map(|_| ctx.rng.random_range(1.0..100.0))
            .collect();
        let coefficients: Vec<f64> =
            (0..n).map(|_| ctx.rng.random_range(0.1..3.0)).collect();
        let specs = [
            ("additive", AggregatorSpec::new(AggregatorKind::Additive)),
            (
                "multiplicative",
                AggregatorSpec::new(AggregatorKind::Multiplicative),
            ),
            (
                "quantile:0.5",
                AggregatorSpec::new(AggregatorKind::Quantile(0.5)),
            ),
            (
                "ltype-positive",
                AggregatorSpec::new(AggregatorKind::LType {
                    coefficients,
                    order: SortOrder::Ascending,
                }),
            ),
        ];
        for (name, spec) in specs {
            let verdict = verify_fisher_consistency(
                IndividualLossSpec::new(kind),
                &spec,
                &actuals,
                ctx.trials,
                0.5,
                ctx.seed,
            )?;
            ctx.push(
                Suite::Fisher,
                &format!("{}+{name}", kind.short_name()),
                VerdictStatus::Pass,
                verdict,
            );
        }
    }
    Ok(())
}

/// Run the requested suites with a deterministic seed. `trials` scales the
/// number of random draws per check.
pub fn run_suites(
    suites: &[Suite],
    seed: u64,
    trials: u64,
) -> Result<Vec<SuiteCheck>, AxiomError> {
    if trials == 0 {
        return Err(AxiomError::NoTrials);
    }
    let mut ctx = Ctx {
        rng: ChaCha8Rng::seed_from_u64(seed),
        seed,
        trials,
        checks: Vec::new(),
    };
    for suite in suites {
        match suite {
            Suite::Anonymity => run_anonymity(&mut ctx)?,
            Suite::Pointwise => run_pointwise(&mut ctx)?,
            Suite::Monotonicity => run_monotonicity(&mut ctx)?,
            Suite::QuantileBlindSpot => run_quantile_blind_spot(&mut ctx)?,
            Suite::LtypeBlindSpot => run_ltype_blind_spot(&mut ctx)?,
            Suite::Isomorphism => run_isomorphism(&mut ctx)?,
            Suite::Fisher => run_fisher(&mut ctx)?,
        }
    }
    Ok(ctx.checks)
}
