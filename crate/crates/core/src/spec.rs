//! Test specifications: hypotheses, ESS evaluation points and weights, the
//! loss matrix, the truncation horizon, and the observation model.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::models::Model;

/// Safety cap used when a specification asks for an unbounded horizon.
pub const DEFAULT_SAFETY_CAP: usize = 10_000;

/// Truncation level of a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    /// No truncation by design; evaluators stop at [`DEFAULT_SAFETY_CAP`].
    Unbounded,
}

impl Horizon {
    pub fn cap(&self) -> usize {
        match self {
            Horizon::Finite(n) => *n,
            Horizon::Unbounded => DEFAULT_SAFETY_CAP,
        }
    }
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Horizon::Finite(n) => serializer.serialize_u64(*n as u64),
            Horizon::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct HorizonVisitor;

        impl Visitor<'_> for HorizonVisitor {
            type Value = Horizon;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive integer or the string \"unbounded\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Horizon, E> {
                if v == 0 {
                    return Err(E::custom("horizon must be at least 1"));
                }
                Ok(Horizon::Finite(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Horizon, E> {
                if v < 1 {
                    return Err(E::custom("horizon must be at least 1"));
                }
                Ok(Horizon::Finite(v as usize))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Horizon, E> {
                if v == "unbounded" {
                    Ok(Horizon::Unbounded)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(HorizonVisitor)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    thetas: Vec<f64>,
    evals: Vec<f64>,
    gammas: Vec<f64>,
    lambdas: Vec<Vec<f64>>,
    horizon: Horizon,
    model: Model,
}

/// A sequential multi-hypothesis test problem.
///
/// Hypothesis `i` is H_i: θ = `thetas[i]`. The weighted ESS criterion is
/// Σ `gammas[i]` · E_{`evals[i]`} τ, and `lambdas[i][j]` is the loss of
/// accepting H_j when H_i is true. Indices are 0-based throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct TestSpec {
    thetas: Vec<f64>,
    evals: Vec<f64>,
    gammas: Vec<f64>,
    lambdas: Vec<Vec<f64>>,
    horizon: Horizon,
    model: Model,
}

impl TryFrom<RawSpec> for TestSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        TestSpec::new(raw.model, raw.thetas, raw.evals, raw.gammas, raw.lambdas, raw.horizon)
    }
}

impl From<TestSpec> for RawSpec {
    fn from(s: TestSpec) -> Self {
        RawSpec {
            thetas: s.thetas,
            evals: s.evals,
            gammas: s.gammas,
            lambdas: s.lambdas,
            horizon: s.horizon,
            model: s.model,
        }
    }
}

impl TestSpec {
    pub fn new(
        model: Model,
        thetas: Vec<f64>,
        evals: Vec<f64>,
        gammas: Vec<f64>,
        lambdas: Vec<Vec<f64>>,
        horizon: Horizon,
    ) -> Result<Self> {
        model.validate()?;
        let k = thetas.len();
        if k < 2 {
            return Err(Error::Spec(format!("need at least 2 hypotheses, got {k}")));
        }
        if evals.is_empty() {
            return Err(Error::Spec("need at least one evaluation point".into()));
        }
        if gammas.len() != evals.len() {
            return Err(Error::Dimension {
                what: "gammas",
                expected: evals.len(),
                got: gammas.len(),
            });
        }
        for &t in thetas.iter().chain(&evals) {
            model.check_parameter(t)?;
        }
        if has_duplicates(&thetas) {
            return Err(Error::Spec("hypothesis values must be distinct".into()));
        }
        if has_duplicates(&evals) {
            return Err(Error::Spec("evaluation points must be distinct".into()));
        }
        if gammas.iter().any(|&g| !g.is_finite() || g <= 0.0) {
            return Err(Error::Spec("weights gamma must be positive".into()));
        }
        let total: f64 = gammas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Spec(format!("weights gamma sum to {total}, not 1")));
        }
        if lambdas.len() != k {
            return Err(Error::Dimension {
                what: "lambda rows",
                expected: k,
                got: lambdas.len(),
            });
        }
        for (i, row) in lambdas.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension {
                    what: "lambda columns",
                    expected: k,
                    got: row.len(),
                });
            }
            for (j, &l) in row.iter().enumerate() {
                if i == j {
                    if l != 0.0 {
                        return Err(Error::Spec(format!(
                            "diagonal lambda[{i}][{i}] must be 0, got {l}"
                        )));
                    }
                } else if !l.is_finite() || l < 0.0 {
                    return Err(Error::Spec(format!(
                        "lambda[{i}][{j}] = {l} must be finite and non-negative"
                    )));
                }
            }
        }
        for j in 0..k {
            let col: f64 = lambdas.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, r)| r[j]).sum();
            if col <= 1.0 {
                return Err(Error::Spec(format!(
                    "non-triviality violated: sum of lambda[i][{j}] over i != {j} is {col} <= 1, \
                     so always accepting H{} without observations is optimal",
                    j + 1
                )));
            }
        }
        if horizon == Horizon::Finite(0) {
            return Err(Error::Spec("horizon must be at least 1".into()));
        }
        Ok(TestSpec {
            thetas,
            evals,
            gammas,
            lambdas,
            horizon,
            model,
        })
    }

    /// Bayesian setting: evaluation points are the hypotheses and the
    /// losses are row-constant, λ_ij = λ_i.
    pub fn bayes(
        model: Model,
        thetas: Vec<f64>,
        gammas: Vec<f64>,
        row_lambdas: &[f64],
        horizon: Horizon,
    ) -> Result<Self> {
        let lambdas = row_constant_lambdas(row_lambdas);
        TestSpec::new(model, thetas.clone(), thetas, gammas, lambdas, horizon)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Number of hypotheses k.
    pub fn k(&self) -> usize {
        self.thetas.len()
    }

    /// Number of ESS evaluation points K.
    pub fn num_evals(&self) -> usize {
        self.evals.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn evals(&self) -> &[f64] {
        &self.evals
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn lambdas(&self) -> &[Vec<f64>] {
        &self.lambdas
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Copy with a different loss matrix, re-validated.
    pub fn with_lambdas(&self, lambdas: Vec<Vec<f64>>) -> Result<Self> {
        TestSpec::new(
            self.model,
            self.thetas.clone(),
            self.evals.clone(),
            self.gammas.clone(),
            lambdas,
            self.horizon,
        )
    }

    /// Copy with different evaluation points and weights, re-validated.
    pub fn with_evals(&self, evals: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        TestSpec::new(
            self.model,
            self.thetas.clone(),
            evals,
            gammas,
            self.lambdas.clone(),
            self.horizon,
        )
    }

    pub fn with_horizon(&self, horizon: Horizon) -> Result<Self> {
        TestSpec::new(
            self.model,
            self.thetas.clone(),
            self.evals.clone(),
            self.gammas.clone(),
            self.lambdas.clone(),
            horizon,
        )
    }
}

/// Expands per-row multipliers λ_i into a k×k matrix with zero diagonal.
pub fn row_constant_lambdas(row_lambdas: &[f64]) -> Vec<Vec<f64>> {
    let k = row_lambdas.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { 0.0 } else { row_lambdas[i] })
                .collect()
        })
        .collect()
}

fn has_duplicates(xs: &[f64]) -> bool {
    xs.iter()
        .enumerate()
        .any(|(i, a)| xs[i + 1..].iter().any(|b| a == b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TestSpec {
        TestSpec::bayes(
            Model::Bernoulli,
            vec![0.3, 0.5],
            vec![0.5, 0.5],
            &[2.0, 2.0],
            Horizon::Finite(10),
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let spec = toy();
        let text = spec.to_json().unwrap();
        assert_eq!(TestSpec::from_json(&text).unwrap(), spec);
        let unbounded = spec.with_horizon(Horizon::Unbounded).unwrap();
        let text = unbounded.to_json().unwrap();
        assert!(text.contains("\"unbounded\""));
        assert_eq!(TestSpec::from_json(&text).unwrap(), unbounded);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"thetas":[0.3,0.5],"evals":[0.3,0.5],"gammas":[0.5,0.5],
            "lambdas":[[0,2],[2,0]],"horizon":10,"model":{"kind":"bernoulli"},"extra":1}"#;
        assert!(TestSpec::from_json(text).is_err());
        let text = r#"{"thetas":[0.3,0.5],"evals":[0.3,0.5],"gammas":[0.5,0.5],
            "lambdas":[[0,2],[2,0]],"horizon":10,"model":{"kind":"grouped_normal","group_size":40}}"#;
        let spec = TestSpec::from_json(text).unwrap();
        assert_eq!(spec.model(), Model::GroupedNormal { group_size: 40 });
    }

    #[test]
    fn field_order_is_irrelevant() {
        let text = r#"{"model":{"kind":"bernoulli"},"horizon":"unbounded","lambdas":[[0,2],[2,0]],
            "gammas":[1.0],"evals":[0.4],"thetas":[0.3,0.5]}"#;
        let spec = TestSpec::from_json(text).unwrap();
        assert_eq!(spec.horizon(), Horizon::Unbounded);
        assert_eq!(spec.horizon().cap(), DEFAULT_SAFETY_CAP);
    }

    #[test]
    fn triviality_rejected() {
        let err = TestSpec::bayes(
            Model::Bernoulli,
            vec![0.3, 0.5],
            vec![0.5, 0.5],
            &[1.0, 2.0],
            Horizon::Finite(10),
        )
        .unwrap_err();
        assert!(err.to_string().contains("non-triviality"));
    }

    #[test]
    fn structural_checks() {
        let m = Model::Bernoulli;
        let lam = row_constant_lambdas(&[2.0, 2.0]);
        let h = Horizon::Finite(5);
        assert!(TestSpec::new(m, vec![0.3], vec![0.3], vec![1.0], vec![vec![0.0]], h).is_err());
        assert!(TestSpec::new(m, vec![0.3, 0.3], vec![0.3], vec![1.0], lam.clone(), h).is_err());
        assert!(TestSpec::new(m, vec![0.3, 0.5], vec![0.3], vec![0.9], lam.clone(), h).is_err());
        assert!(TestSpec::new(m, vec![0.3, 1.5], vec![0.3], vec![1.0], lam.clone(), h).is_err());
        assert!(
            TestSpec::new(m, vec![0.3, 0.5], vec![0.3, 0.4], vec![1.0, 0.0], lam.clone(), h)
                .is_err()
        );
        let mut bad_diag = lam.clone();
        bad_diag[0][0] = 1.0;
        assert!(TestSpec::new(m, vec![0.3, 0.5], vec![0.3], vec![1.0], bad_diag, h).is_err());
        assert!(TestSpec::new(m, vec![0.3, 0.5], vec![0.3], vec![1.0], lam, Horizon::Finite(0))
            .is_err());
    }
}
