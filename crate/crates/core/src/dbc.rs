//! Dropped-backward-control (DBC) stopping and decision rules.
//!
//! With risk candidates R_j = Σ_{i≠j} λ_ij f_{θ_i}ⁿ and the weighted density
//! f_{γϑ}ⁿ = Σ_i γ_i f_{ϑ_i}ⁿ, the DBC test stops at the first n ≥ 1 with
//! min_j R_j ≤ f_{γϑ}ⁿ and accepts the hypothesis attaining the minimum.
//! It is the optimal backward-induction rule with the future-value term
//! removed from the stop condition.
//!
//! Conventions:
//! - equality in the stop condition stops;
//! - ties between risk candidates go to the smallest hypothesis index;
//! - n = 0 never stops.
//!
//! Everything is evaluated in log space.

use crate::error::{Error, Result};
use crate::numeric::{ln_or_neg_inf, log_sum_exp_weighted};
use crate::report::TestReport;
use crate::spec::TestSpec;
use crate::state::LogLikState;

/// Outcome of applying a rule to a state. Hypothesis indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Continue,
    Accept(usize),
}

impl Verdict {
    pub fn is_stopped(&self) -> bool {
        matches!(self, Verdict::Accept(_))
    }

    pub fn accepted(&self) -> Option<usize> {
        match self {
            Verdict::Continue => None,
            Verdict::Accept(j) => Some(*j),
        }
    }
}

/// A sequential test acting on [`LogLikState`]s.
pub trait SequentialRule: Sync {
    /// Stop/decide at the current state.
    fn verdict(&self, state: &LogLikState) -> Verdict;

    /// Decision forced at the truncation horizon.
    fn terminal_decision(&self, state: &LogLikState) -> usize;
}

/// log Σ_i γ_i f_{ϑ_i}ⁿ. Returns `-inf` iff every density is zero.
pub fn log_weighted_density(state: &LogLikState, gammas: &[f64]) -> Result<f64> {
    if gammas.len() != state.logf_eval.len() {
        return Err(Error::Dimension {
            what: "gammas",
            expected: state.logf_eval.len(),
            got: gammas.len(),
        });
    }
    let log_g: Vec<f64> = gammas.iter().map(|&g| ln_or_neg_inf(g)).collect();
    Ok(log_sum_exp_weighted(&log_g, &state.logf_eval))
}

/// Entry j is log Σ_{i≠j} λ_ij f_{θ_i}ⁿ; the smallest entry is log vₙ.
pub fn log_risk_candidates(state: &LogLikState, lambdas: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = state.logf_theta.len();
    if lambdas.len() != k || lambdas.iter().any(|r| r.len() != k) {
        return Err(Error::Dimension {
            what: "lambda matrix",
            expected: k,
            got: lambdas.len(),
        });
    }
    let cols = log_lambda_columns(lambdas);
    let mut out = vec![0.0; k];
    risk_candidates_into(&cols, &state.logf_theta, &mut out);
    Ok(out)
}

/// DBC verdict of `spec` at `state`.
pub fn dbc_verdict(state: &LogLikState, spec: &TestSpec) -> Verdict {
    DbcRule::new(spec).verdict(state)
}

/// Posterior probabilities πᵢⁿ ∝ γ_i f_{θ_i}ⁿ in the Bayesian setting where
/// the evaluation points coincide with the hypotheses. At n = 0 this is γ.
pub fn posterior(state: &LogLikState, gammas: &[f64]) -> Result<Vec<f64>> {
    let k = state.logf_theta.len();
    if gammas.len() != k {
        return Err(Error::Dimension {
            what: "gammas",
            expected: k,
            got: gammas.len(),
        });
    }
    let log_g: Vec<f64> = gammas.iter().map(|&g| ln_or_neg_inf(g)).collect();
    let norm = log_sum_exp_weighted(&log_g, &state.logf_theta);
    if norm == f64::NEG_INFINITY {
        return Err(Error::UndefinedState);
    }
    Ok(log_g
        .iter()
        .zip(&state.logf_theta)
        .map(|(g, l)| (g + l - norm).exp())
        .collect())
}

/// min_j Σ_{i≠j} λ_ij πᵢⁿ/γ_i, the posterior form of the DBC stop statistic
/// (stop iff ≤ 1). Requires the Bayesian setting.
pub fn posterior_stop_statistic(state: &LogLikState, spec: &TestSpec) -> Result<f64> {
    if spec.thetas() != spec.evals() {
        return Err(Error::Spec(
            "posterior form needs evaluation points equal to the hypotheses".into(),
        ));
    }
    let pi = posterior(state, spec.gammas())?;
    let g = spec.gammas();
    let lam = spec.lambdas();
    let k = spec.k();
    Ok((0..k)
        .map(|j| {
            (0..k)
                .filter(|&i| i != j)
                .map(|i| lam[i][j] * pi[i] / g[i])
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min))
}

/// C_{γ,ϑ} + Σ_{i≠j} λ_ij α_ij for a report produced under `spec`.
pub fn lagrangian(report: &TestReport, spec: &TestSpec) -> f64 {
    let lam = spec.lambdas();
    let mut total = report.weighted_ess;
    for (i, row) in report.alpha.iter().enumerate() {
        for (j, a) in row.iter().enumerate() {
            if i != j {
                total += lam[i][j] * a;
            }
        }
    }
    total
}

/// Precomputed DBC rule for repeated evaluation.
#[derive(Debug, Clone)]
pub struct DbcRule {
    /// `log_lambda_cols[j][i]` = ln λ_ij, `-inf` on the diagonal.
    log_lambda_cols: Vec<Vec<f64>>,
    log_gammas: Vec<f64>,
}

impl DbcRule {
    pub fn new(spec: &TestSpec) -> Self {
        DbcRule {
            log_lambda_cols: log_lambda_columns(spec.lambdas()),
            log_gammas: spec.gammas().iter().map(|&g| g.ln()).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.log_lambda_cols.len()
    }

    /// (index, value) of the smallest log risk candidate, smallest index on ties.
    pub fn min_candidate(&self, logf_theta: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, col) in self.log_lambda_cols.iter().enumerate() {
            let c = log_sum_exp_weighted(col, logf_theta);
            if c < best.1 || j == 0 {
                best = (j, c);
            }
        }
        best
    }

    pub fn log_mixture(&self, logf_eval: &[f64]) -> f64 {
        log_sum_exp_weighted(&self.log_gammas, logf_eval)
    }

    /// Verdict from the raw log-density vectors at step `n`.
    pub fn verdict_parts(&self, n: usize, logf_theta: &[f64], logf_eval: &[f64]) -> Verdict {
        if n == 0 {
            return Verdict::Continue;
        }
        let (j, log_v) = self.min_candidate(logf_theta);
        if log_v <= self.log_mixture(logf_eval) {
            Verdict::Accept(j)
        } else {
            Verdict::Continue
        }
    }

    /// Decision rule alone: the hypothesis with the smallest risk candidate.
    pub fn decision(&self, logf_theta: &[f64]) -> usize {
        self.min_candidate(logf_theta).0
    }
}

impl SequentialRule for DbcRule {
    fn verdict(&self, state: &LogLikState) -> Verdict {
        self.verdict_parts(state.n, &state.logf_theta, &state.logf_eval)
    }

    fn terminal_decision(&self, state: &LogLikState) -> usize {
        self.decision(&state.logf_theta)
    }
}

pub(crate) fn log_lambda_columns(lambdas: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = lambdas.len();
    (0..k)
        .map(|j| {
            (0..k)
                .map(|i| {
                    if i == j {
                        f64::NEG_INFINITY
                    } else {
                        ln_or_neg_inf(lambdas[i][j])
                    }
                })
                .collect()
        })
        .collect()
}

fn risk_candidates_into(cols: &[Vec<f64>], logf_theta: &[f64], out: &mut [f64]) {
    for (o, col) in out.iter_mut().zip(cols) {
        *o = log_sum_exp_weighted(col, logf_theta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Model;
    use crate::spec::{row_constant_lambdas, Horizon};

    fn state(logf_theta: Vec<f64>, logf_eval: Vec<f64>) -> LogLikState {
        LogLikState {
            n: 1,
            logf_theta,
            logf_eval,
        }
    }

    #[test]
    fn weighted_density_examples() {
        let s = state(vec![0.0, 0.0], vec![-3.2]);
        assert_eq!(log_weighted_density(&s, &[1.0]).unwrap(), -3.2);
        let s = state(vec![0.0, 0.0], vec![0.0, 0.0]);
        assert!(log_weighted_density(&s, &[0.5, 0.5]).unwrap().abs() < 1e-16);
        let s = state(vec![0.0, 0.0], vec![0.4f64.ln(), 0.2f64.ln()]);
        let v = log_weighted_density(&s, &[0.5, 0.5]).unwrap();
        assert!((v - 0.3f64.ln()).abs() < 1e-15);
        let s = state(vec![0.0, 0.0], vec![f64::NEG_INFINITY; 2]);
        assert_eq!(log_weighted_density(&s, &[0.5, 0.5]).unwrap(), f64::NEG_INFINITY);
        assert!(log_weighted_density(&s, &[1.0]).is_err());
    }

    #[test]
    fn risk_candidate_examples() {
        let s = state(vec![0.0, 0.0], vec![0.0]);
        let c = log_risk_candidates(&s, &row_constant_lambdas(&[2.0, 2.0])).unwrap();
        assert!((c[0] - 2f64.ln()).abs() < 1e-15 && (c[1] - 2f64.ln()).abs() < 1e-15);

        let s = state(vec![0.2f64.ln(), 0.3f64.ln(), 0.5f64.ln()], vec![0.0]);
        let lam = row_constant_lambdas(&[1.0, 1.0, 1.0]);
        let c = log_risk_candidates(&s, &lam).unwrap();
        for (got, want) in c.iter().zip([0.8f64, 0.7, 0.5]) {
            assert!((got - want.ln()).abs() < 1e-15, "{got} vs {}", want.ln());
        }

        let s = state(vec![0.5f64.ln(), f64::NEG_INFINITY], vec![0.0]);
        let lam = vec![vec![0.0, 3.0], vec![2.0, 0.0]];
        let c = log_risk_candidates(&s, &lam).unwrap();
        assert_eq!(c[0], f64::NEG_INFINITY);
        assert!((c[1] - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_never_stops_on_equal_densities() {
        let spec = TestSpec::bayes(
            Model::Bernoulli,
            vec![0.3, 0.7],
            vec![0.5, 0.5],
            &[2.0, 2.0],
            Horizon::Finite(10),
        )
        .unwrap();
        for c in [-50.0, -1.0, 0.0, 3.0] {
            let s = state(vec![c, c], vec![c, c]);
            assert_eq!(dbc_verdict(&s, &spec), Verdict::Continue);
        }
        let s0 = LogLikState::initial(2, 2);
        assert_eq!(dbc_verdict(&s0, &spec), Verdict::Continue);
    }

    #[test]
    fn equality_stops_and_ties_pick_smallest_index() {
        // λ f1 = γ-mixture exactly: λ_21 f2 = 1.0, mixture = 1.0.
        let spec = TestSpec::new(
            Model::Bernoulli,
            vec![0.3, 0.7],
            vec![0.5],
            vec![1.0],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            Horizon::Finite(10),
        )
        .unwrap();
        let s = state(vec![0.5f64.ln(), 0.5f64.ln()], vec![0.0]);
        assert_eq!(dbc_verdict(&s, &spec), Verdict::Accept(0));
    }

    #[test]
    fn posterior_examples() {
        let s = LogLikState::initial(3, 3);
        let p = posterior(&s, &[0.2, 0.3, 0.5]).unwrap();
        for (a, b) in p.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = state(vec![0.8f64.ln(), 0.2f64.ln()], vec![0.0, 0.0]);
        let p = posterior(&s, &[0.25, 0.75]).unwrap();
        assert!((p[0] - 4.0 / 7.0).abs() < 1e-15 && (p[1] - 3.0 / 7.0).abs() < 1e-15);
        let s = state(vec![1.0, 1.0], vec![0.0, 0.0]);
        let p = posterior(&s, &[0.5, 0.5]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        let s = state(vec![f64::NEG_INFINITY; 2], vec![0.0, 0.0]);
        assert!(matches!(posterior(&s, &[0.5, 0.5]), Err(Error::UndefinedState)));
    }

    #[test]
    fn lagrangian_without_errors_is_ess() {
        let spec = TestSpec::bayes(
            Model::Bernoulli,
            vec![0.3, 0.7],
            vec![0.5, 0.5],
            &[2.0, 2.0],
            Horizon::Finite(10),
        )
        .unwrap();
        let report = TestReport {
            schema: 1,
            thetas: vec![0.3, 0.7],
            alpha: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            alpha_i: vec![0.0, 0.0],
            params: vec![],
            weighted_ess: 10.0,
            se: None,
            reps: None,
        };
        assert_eq!(lagrangian(&report, &spec), 10.0);
    }
}
