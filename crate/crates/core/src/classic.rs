//! Classical sequential tests and their reductions to DBC rules.
//!
//! For two hypotheses in the Bayesian setting the DBC rule is Wald's SPRT
//! with thresholds A = γ₁/(λ₂ − γ₂) and B = (λ₁ − γ₁)/γ₂ on f_{θ₂}ⁿ/f_{θ₁}ⁿ.
//! With a single evaluation point ϑ (γ₁ = 1) it is Lorden's 2-SPRT. The
//! MSPRT here is Armitage's pairwise form.

use serde::{Deserialize, Serialize};

use crate::dbc::{SequentialRule, Verdict};
use crate::error::{Error, Result};
use crate::lattice::OcPoint;
use crate::report::TestReport;
use crate::state::LogLikState;

/// Wald SPRT on the ratio f_{θ₂}ⁿ/f_{θ₁}ⁿ: accept H₁ when it is ≤ A, H₂
/// when it is ≥ B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprtRule {
    pub a: f64,
    pub b: f64,
    /// Ratio at or above which the terminal decision is H₂ (λ₁/λ₂).
    pub decision_threshold: f64,
}

/// SPRT produced by the DBC rule with row multipliers (λ₁, λ₂) and weights
/// (γ₁, γ₂) when the evaluation points are the hypotheses.
pub fn sprt_from_lagrange(lambda1: f64, lambda2: f64, gamma1: f64, gamma2: f64) -> Result<SprtRule> {
    if !(lambda1 > 1.0 && lambda2 > 1.0) {
        return Err(Error::Spec(format!(
            "both multipliers must exceed 1 (non-triviality), got {lambda1} and {lambda2}"
        )));
    }
    if !(gamma1 > 0.0 && gamma2 > 0.0) || (gamma1 + gamma2 - 1.0).abs() > 1e-12 {
        return Err(Error::Spec("weights must be positive and sum to 1".into()));
    }
    let a = gamma1 / (lambda2 - gamma2);
    let b = (lambda1 - gamma1) / gamma2;
    let decision_threshold = lambda1 / lambda2;
    debug_assert!(a < decision_threshold && decision_threshold < b);
    Ok(SprtRule {
        a,
        b,
        decision_threshold,
    })
}

impl SprtRule {
    fn log_ratio(state: &LogLikState) -> f64 {
        state.logf_theta[1] - state.logf_theta[0]
    }
}

impl SequentialRule for SprtRule {
    fn verdict(&self, state: &LogLikState) -> Verdict {
        if state.n == 0 {
            return Verdict::Continue;
        }
        let r = Self::log_ratio(state);
        if r <= self.a.ln() {
            Verdict::Accept(0)
        } else if r >= self.b.ln() {
            Verdict::Accept(1)
        } else {
            Verdict::Continue
        }
    }

    fn terminal_decision(&self, state: &LogLikState) -> usize {
        if Self::log_ratio(state) >= self.decision_threshold.ln() {
            1
        } else {
            0
        }
    }
}

/// Lorden's 2-SPRT in DBC form: stop when min{λ₁f_{θ₁}ⁿ, λ₂f_{θ₂}ⁿ} ≤ f_ϑⁿ,
/// accept H₁ iff λ₁f_{θ₁}ⁿ ≥ λ₂f_{θ₂}ⁿ. States carry the two hypothesis
/// densities and the single density at ϑ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSprtRule {
    pub thetas: [f64; 2],
    pub vartheta: f64,
    log_lambda: [f64; 2],
}

pub fn two_sprt(lambda1: f64, lambda2: f64, theta1: f64, theta2: f64, vartheta: f64) -> Result<TwoSprtRule> {
    if !(lambda1 > 1.0 && lambda2 > 1.0) {
        return Err(Error::Spec(format!(
            "both multipliers must exceed 1, got {lambda1} and {lambda2}"
        )));
    }
    Ok(TwoSprtRule {
        thetas: [theta1, theta2],
        vartheta,
        log_lambda: [lambda1.ln(), lambda2.ln()],
    })
}

impl TwoSprtRule {
    fn decide(&self, state: &LogLikState) -> usize {
        let l1 = self.log_lambda[0] + state.logf_theta[0];
        let l2 = self.log_lambda[1] + state.logf_theta[1];
        if l1 >= l2 {
            0
        } else {
            1
        }
    }
}

impl SequentialRule for TwoSprtRule {
    fn verdict(&self, state: &LogLikState) -> Verdict {
        if state.n == 0 {
            return Verdict::Continue;
        }
        let l1 = self.log_lambda[0] + state.logf_theta[0];
        let l2 = self.log_lambda[1] + state.logf_theta[1];
        if l1.min(l2) <= state.logf_eval[0] {
            Verdict::Accept(self.decide(state))
        } else {
            Verdict::Continue
        }
    }

    fn terminal_decision(&self, state: &LogLikState) -> usize {
        self.decide(state)
    }
}

/// Armitage's matrix SPRT.
///
/// `log_thresholds[i][j]` is log A_ij, the threshold the log-likelihood
/// ratio log f_{θ_j}ⁿ − log f_{θ_i}ⁿ must reach for H_j to be accepted over
/// H_i; the indexing follows α_ij (i true, j accepted), so A_ij guards α_ij.
/// H_j is accepted once it clears every competitor, smallest j first. At
/// the truncation horizon the most likely hypothesis is accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsprtRule {
    pub log_thresholds: Vec<Vec<f64>>,
}

impl MsprtRule {
    pub fn new(log_thresholds: Vec<Vec<f64>>) -> Result<Self> {
        let k = log_thresholds.len();
        if k < 2 {
            return Err(Error::Spec("the MSPRT needs at least 2 hypotheses".into()));
        }
        for (i, row) in log_thresholds.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension {
                    what: "MSPRT thresholds",
                    expected: k,
                    got: row.len(),
                });
            }
            if row.iter().enumerate().any(|(j, v)| i != j && !v.is_finite()) {
                return Err(Error::Spec("MSPRT thresholds must be finite".into()));
            }
        }
        Ok(MsprtRule { log_thresholds })
    }

    /// All off-diagonal thresholds equal to `log_a`.
    pub fn uniform(k: usize, log_a: f64) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { 0.0 } else { log_a }).collect())
                .collect(),
        )
    }

    /// log A_ij = `log_b[i]`: one threshold per rejected hypothesis, the
    /// natural handle on the per-hypothesis errors α_i.
    pub fn row_constant(log_b: &[f64]) -> Result<Self> {
        let k = log_b.len();
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { 0.0 } else { log_b[i] }).collect())
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.log_thresholds.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MsprtRule = serde_json::from_str(text)?;
        Self::new(raw.log_thresholds)
    }
}

/// MSPRT verdict at `state`.
pub fn msprt_verdict(state: &LogLikState, rule: &MsprtRule) -> Verdict {
    rule.verdict(state)
}

impl SequentialRule for MsprtRule {
    fn verdict(&self, state: &LogLikState) -> Verdict {
        if state.n == 0 {
            return Verdict::Continue;
        }
        let l = &state.logf_theta;
        let k = self.k();
        for j in 0..k {
            if (0..k).all(|i| i == j || l[j] - l[i] >= self.log_thresholds[i][j]) {
                return Verdict::Accept(j);
            }
        }
        Verdict::Continue
    }

    fn terminal_decision(&self, state: &LogLikState) -> usize {
        let mut best = 0;
        for (j, &v) in state.logf_theta.iter().enumerate() {
            if v > state.logf_theta[best] {
                best = j;
            }
        }
        best
    }
}

/// Two-decision summary of a three-hypothesis test whose middle hypothesis
/// plays the simple null H₀′ and whose outer hypotheses form the two-sided
/// alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedReport {
    /// Index (0-based) of the null among the three hypotheses.
    pub null_index: usize,
    /// P(reject H₀′ | null true).
    pub alpha: f64,
    /// Error probability α_i of each alternative, in hypothesis order: the
    /// probability of accepting any other hypothesis when it is true.
    pub beta: Vec<f64>,
    /// P(accept H₀′ | each alternative true), the two-decision type II error.
    pub accept_null: Vec<f64>,
    /// OC (probability of accepting H₀′) and ESS at every parameter in the report.
    pub curve: Vec<OcPoint>,
}

/// Collapses a three-hypothesis report into accept/reject H₀′: acceptance of
/// any non-null hypothesis rejects the null.
pub fn two_sided_wrap(report: &TestReport, null_index: usize) -> Result<TwoSidedReport> {
    let k = report.thetas.len();
    if k != 3 {
        return Err(Error::Spec(format!(
            "the two-sided construction needs 3 hypotheses, got {k}"
        )));
    }
    if null_index >= k {
        return Err(Error::Spec(format!("null index {} out of range", null_index + 1)));
    }
    let alpha = report.alpha_i[null_index];
    let others: Vec<usize> = (0..k).filter(|&i| i != null_index).collect();
    let beta = others.iter().map(|&i| report.alpha_i[i]).collect();
    let accept_null = others.iter().map(|&i| report.alpha[i][null_index]).collect();
    let curve = report
        .params
        .iter()
        .map(|p| OcPoint {
            theta: p.theta,
            oc: p.accept[null_index],
            ess: p.ess,
        })
        .collect();
    Ok(TwoSidedReport {
        null_index,
        alpha,
        beta,
        accept_null,
        curve,
    })
}
