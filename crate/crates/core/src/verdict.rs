//! Pass/fail evidence produced by the verification checks.

use serde::{Deserialize, Serialize};

/// The property a verdict is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Anonymity,
    PointwiseMonotonicity,
    TotalMonotonicity,
    FisherConsistency,
    RankIsomorphism,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Anonymity => "anonymity",
            Axiom::PointwiseMonotonicity => "pointwise_monotonicity",
            Axiom::TotalMonotonicity => "total_monotonicity",
            Axiom::FisherConsistency => "fisher_consistency",
            Axiom::RankIsomorphism => "rank_isomorphism",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
}

impl VerdictStatus {
    pub fn name(self) -> &'static str {
        match self {
            VerdictStatus::Pass => "pass",
            VerdictStatus::Fail => "fail",
        }
    }
}

/// A reproducible witness for a failed check: the input, the perturbed or
/// compared input, and the two totals that disagree with the property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub description: String,
    pub input: Vec<f64>,
    pub perturbed: Vec<f64>,
    pub total_before: f64,
    pub total_after: f64,
}

/// Outcome of one check.
///
/// Invariants: `trials > 0`; `Fail` carries a counterexample and `Pass`
/// never does; `seed` is present whenever randomness was involved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub status: VerdictStatus,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl AxiomVerdict {
    pub fn pass(axiom: Axiom, trials: u64, seed: Option<u64>) -> Self {
        assert!(trials > 0, "a verdict needs at least one trial");
        Self {
            axiom,
            status: VerdictStatus::Pass,
            trials,
            counterexample: None,
            seed,
        }
    }

    pub fn fail(
        axiom: Axiom,
        trials: u64,
        seed: Option<u64>,
        counterexample: Counterexample,
    ) -> Self {
        assert!(trials > 0, "a verdict needs at least one trial");
        Self {
            axiom,
            status: VerdictStatus::Fail,
            trials,
            counterexample: Some(counterexample),
            seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}
