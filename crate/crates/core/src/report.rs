//! Operating characteristics of a test: error matrix, expected sample sizes,
//! stopping-time distributions, and (for Monte Carlo) standard errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec::TestSpec;

pub const REPORT_SCHEMA: u32 = 1;

/// Characteristics under one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSummary {
    pub theta: f64,
    /// P_θ(accept H_j) for every hypothesis j.
    pub accept: Vec<f64>,
    /// E_θ τ measured in raw observations.
    pub ess: f64,
    /// P_θ(τ = n) for steps n = 1..=N.
    pub stop_dist: Vec<f64>,
    /// Probability of reaching the truncation horizon. For exact lattice
    /// evaluation this is P_θ(τ = N); for Monte Carlo it is the fraction of
    /// replications stopped by the cap rather than by the rule.
    pub horizon_mass: f64,
}

/// Standard errors aligned with the estimates of a [`TestReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StdErrors {
    pub alpha: Vec<Vec<f64>>,
    pub alpha_i: Vec<f64>,
    /// Aligned with [`TestReport::params`].
    pub ess: Vec<f64>,
    pub weighted_ess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestReport {
    pub schema: u32,
    /// Hypothesis values, in the order of the rows of `alpha`.
    pub thetas: Vec<f64>,
    /// `alpha[i][j]` = P_{θ_i}(accept H_j); the diagonal holds the
    /// correct-acceptance probabilities.
    pub alpha: Vec<Vec<f64>>,
    /// `alpha_i[i]` = 1 − `alpha[i][i]`.
    pub alpha_i: Vec<f64>,
    pub params: Vec<ParamSummary>,
    /// Σ γ_i E_{ϑ_i} τ.
    pub weighted_ess: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<StdErrors>,
    /// Replications per parameter, for Monte Carlo reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
}

impl TestReport {
    /// Builds the report of `spec` from per-parameter summaries, which must
    /// cover every hypothesis and evaluation point.
    pub fn assemble(
        spec: &TestSpec,
        params: Vec<ParamSummary>,
        param_se: Option<Vec<ParamSe>>,
        reps: Option<u64>,
    ) -> Result<Self> {
        Self::assemble_parts(spec.thetas(), spec.evals(), spec.gammas(), params, param_se, reps)
    }

    pub fn assemble_parts(
        thetas: &[f64],
        evals: &[f64],
        gammas: &[f64],
        params: Vec<ParamSummary>,
        param_se: Option<Vec<ParamSe>>,
        reps: Option<u64>,
    ) -> Result<Self> {
        let find = |t: f64| {
            params.iter().position(|p| p.theta == t).ok_or_else(|| {
                Error::Spec(format!("report is missing parameter value {t}"))
            })
        };
        let rows: Vec<usize> = thetas.iter().map(|&t| find(t)).collect::<Result<_>>()?;
        let eval_rows: Vec<usize> = evals.iter().map(|&t| find(t)).collect::<Result<_>>()?;
        let alpha: Vec<Vec<f64>> = rows.iter().map(|&r| params[r].accept.clone()).collect();
        let alpha_i = alpha.iter().enumerate().map(|(i, row)| 1.0 - row[i]).collect();
        let weighted_ess = eval_rows
            .iter()
            .zip(gammas)
            .map(|(&r, g)| g * params[r].ess)
            .sum();
        let se = param_se.map(|pse| {
            let alpha: Vec<Vec<f64>> = rows.iter().map(|&r| pse[r].accept.clone()).collect();
            // A Bernoulli frequency and its complement share one standard error.
            let alpha_i = alpha.iter().enumerate().map(|(i, row)| row[i]).collect();
            let weighted_ess = eval_rows
                .iter()
                .zip(gammas)
                .map(|(&r, g)| (g * pse[r].ess).powi(2))
                .sum::<f64>()
                .sqrt();
            StdErrors {
                alpha,
                alpha_i,
                ess: pse.iter().map(|p| p.ess).collect(),
                weighted_ess,
            }
        });
        Ok(TestReport {
            schema: REPORT_SCHEMA,
            thetas: thetas.to_vec(),
            alpha,
            alpha_i,
            params,
            weighted_ess,
            se,
            reps,
        })
    }

    pub fn param(&self, theta: f64) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.theta == theta)
    }

    pub fn ess_at(&self, theta: f64) -> Option<f64> {
        self.param(theta).map(|p| p.ess)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV with columns `kind,theta,accepted,estimate,se`: one `alpha` row
    /// per (true hypothesis, accepted hypothesis), one `ess` row per
    /// parameter, and a final `weighted_ess` row. Numbers carry 17
    /// significant digits; `se` is empty for exact reports.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "theta", "accepted", "estimate", "se"])
            .map_err(csv_err)?;
        let se = self.se.as_ref();
        for (i, row) in self.alpha.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                let e = se.map(|s| fmt17(s.alpha[i][j])).unwrap_or_default();
                w.write_record([
                    "alpha".to_string(),
                    fmt17(self.thetas[i]),
                    (j + 1).to_string(),
                    fmt17(a),
                    e,
                ])
                .map_err(csv_err)?;
            }
        }
        for (p_idx, p) in self.params.iter().enumerate() {
            let e = se.map(|s| fmt17(s.ess[p_idx])).unwrap_or_default();
            w.write_record(["ess".to_string(), fmt17(p.theta), String::new(), fmt17(p.ess), e])
                .map_err(csv_err)?;
        }
        let e = se.map(|s| fmt17(s.weighted_ess)).unwrap_or_default();
        w.write_record([
            "weighted_ess".to_string(),
            String::new(),
            String::new(),
            fmt17(self.weighted_ess),
            e,
        ])
        .map_err(csv_err)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Per-parameter standard errors, produced by the Monte Carlo evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSe {
    pub accept: Vec<f64>,
    pub ess: f64,
}

/// Formats with 17 significant digits, enough for a lossless f64 round trip.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Model;
    use crate::spec::Horizon;

    fn summary(theta: f64, accept: Vec<f64>, ess: f64) -> ParamSummary {
        ParamSummary {
            theta,
            accept,
            ess,
            stop_dist: vec![1.0],
            horizon_mass: 0.0,
        }
    }

    #[test]
    fn assemble_and_csv() {
        let spec = TestSpec::new(
            Model::Bernoulli,
            vec![0.3, 0.5],
            vec![0.4],
            vec![1.0],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            Horizon::Finite(1),
        )
        .unwrap();
        let params = vec![
            summary(0.3, vec![0.9, 0.1], 1.0),
            summary(0.5, vec![0.2, 0.8], 1.0),
            summary(0.4, vec![0.5, 0.5], 1.0),
        ];
        let r = TestReport::assemble(&spec, params, None, None).unwrap();
        assert_eq!(r.alpha_i.len(), 2);
        assert!((r.alpha_i[0] - 0.1).abs() < 1e-15);
        assert!((r.alpha_i[1] - 0.2).abs() < 1e-15);
        assert_eq!(r.weighted_ess, 1.0);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 1 + 4 + 3 + 1);
        let back: f64 = csv.lines().nth(2).unwrap().split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
        assert_eq!(TestReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn missing_param_is_an_error() {
        let spec = TestSpec::bayes(
            Model::Bernoulli,
            vec![0.3, 0.5],
            vec![0.5, 0.5],
            &[2.0, 2.0],
            Horizon::Finite(1),
        )
        .unwrap();
        let params = vec![summary(0.3, vec![1.0, 0.0], 1.0)];
        assert!(TestReport::assemble(&spec, params, None, None).is_err());
    }
}
