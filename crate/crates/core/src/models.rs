//! Observation processes.
//!
//! A [`Model`] supplies the per-step log-density increment of a single
//! observation given the parameter, plus a sampler for Monte Carlo runs. All
//! normal kinds have unit variance. For [`Model::GroupedNormal`] a "step" is
//! the sum of `group_size` raw observations, which is sufficient for the group
//! mean; the density of the sum differs from the joint density of the group
//! only by a factor that does not depend on the parameter, so every likelihood
//! comparison made by the tests is unchanged.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Observation-process descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    /// i.i.d. Bernoulli with success probability θ.
    Bernoulli,
    /// i.i.d. N(θ, 1).
    Normal,
    /// Independent N(θ·t, 1) at step t.
    NormalTrend,
    /// Group sums of `group_size` i.i.d. N(θ, 1) observations.
    GroupedNormal { group_size: usize },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Bernoulli => "bernoulli",
            Model::Normal => "normal",
            Model::NormalTrend => "normal_trend",
            Model::GroupedNormal { .. } => "grouped_normal",
        }
    }

    /// Raw observations consumed by one step.
    pub fn observations_per_step(&self) -> usize {
        match self {
            Model::GroupedNormal { group_size } => *group_size,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Model::GroupedNormal { group_size } = self {
            if *group_size == 0 {
                return Err(Error::Spec("group_size must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Checks that `theta` is a legal parameter value for this model.
    pub fn check_parameter(&self, theta: f64) -> Result<()> {
        let ok = match self {
            Model::Bernoulli => theta > 0.0 && theta < 1.0,
            _ => theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Spec(format!(
                "parameter {theta} is not valid for the {} model",
                self.name()
            )))
        }
    }

    /// Log of the per-sequence density increment contributed by observation
    /// `x` at step `t` (1-based). Bernoulli increments carry no binomial
    /// coefficient: densities are per sequence under the counting measure.
    pub fn log_density_increment(&self, theta: f64, x: f64, t: usize) -> Result<f64> {
        match *self {
            Model::Bernoulli => {
                if x == 1.0 {
                    Ok(theta.ln())
                } else if x == 0.0 {
                    Ok((1.0 - theta).ln())
                } else {
                    Err(Error::Domain { model: self.name(), x })
                }
            }
            Model::Normal => {
                check_real(self, x)?;
                let r = x - theta;
                Ok(-0.5 * r * r - HALF_LN_2PI)
            }
            Model::NormalTrend => {
                check_real(self, x)?;
                let r = x - theta * t as f64;
                Ok(-0.5 * r * r - HALF_LN_2PI)
            }
            Model::GroupedNormal { group_size } => {
                check_real(self, x)?;
                let m = group_size as f64;
                let r = x - m * theta;
                Ok(-0.5 * r * r / m - 0.5 * (2.0 * PI * m).ln())
            }
        }
    }

    /// Draws the step-`t` observation under `theta`.
    pub fn sample<R: Rng + ?Sized>(&self, theta: f64, t: usize, rng: &mut R) -> f64 {
        match *self {
            Model::Bernoulli => {
                if rng.random::<f64>() < theta {
                    1.0
                } else {
                    0.0
                }
            }
            Model::Normal => theta + rng.sample::<f64, _>(StandardNormal),
            Model::NormalTrend => theta * t as f64 + rng.sample::<f64, _>(StandardNormal),
            Model::GroupedNormal { group_size } => {
                let m = group_size as f64;
                m * theta + m.sqrt() * rng.sample::<f64, _>(StandardNormal)
            }
        }
    }
}

fn check_real(model: &Model, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { model: model.name(), x })
    }
}

/// Sufficient statistic of a stream: step count and the success count
/// (Bernoulli) or cumulative weighted sum (normal kinds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientState {
    pub n: usize,
    pub stat: f64,
}

impl SufficientState {
    pub fn new() -> Self {
        SufficientState { n: 0, stat: 0.0 }
    }

    /// Folds in the step-`n+1` observation. The normal-trend statistic is
    /// Σ t·x_t; the other kinds use Σ x_t.
    pub fn push(&mut self, model: &Model, x: f64) {
        self.n += 1;
        match model {
            Model::NormalTrend => self.stat += self.n as f64 * x,
            _ => self.stat += x,
        }
    }

    /// Closed-form log f_θⁿ from the statistic.
    pub fn log_density(&self, model: &Model, theta: f64) -> f64 {
        let n = self.n as f64;
        match *model {
            Model::Bernoulli => bernoulli_log_density(self.n, self.stat as usize, theta),
            // Only the θ-dependent part; the θ-free residual term is dropped,
            // which is harmless for likelihood ratios but not for absolute values.
            Model::Normal => theta * self.stat - 0.5 * n * theta * theta,
            Model::NormalTrend => {
                let sum_t2 = n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
                theta * self.stat - 0.5 * theta * theta * sum_t2
            }
            Model::GroupedNormal { group_size } => {
                let m = group_size as f64;
                theta * self.stat - 0.5 * n * m * theta * theta
            }
        }
    }
}

impl Default for SufficientState {
    fn default() -> Self {
        Self::new()
    }
}

/// log f_θⁿ of one 0/1 sequence of length `n` with `s` successes.
#[inline]
pub fn bernoulli_log_density(n: usize, s: usize, theta: f64) -> f64 {
    debug_assert!(s <= n);
    let s_f = s as f64;
    let f_f = (n - s) as f64;
    // 0·ln(0) terms never arise: θ is interior.
    s_f * theta.ln() + f_f * (1.0 - theta).ln()
}

/// Hellinger affinity ∫(f_θ f_ϑ)^{1/2} dμ of one observation. Defined for the
/// identically distributed kinds only.
pub fn hellinger_affinity(model: &Model, theta: f64, vartheta: f64) -> Result<f64> {
    match model {
        Model::Bernoulli => {
            model.check_parameter(theta)?;
            model.check_parameter(vartheta)?;
            Ok((theta * vartheta).sqrt() + ((1.0 - theta) * (1.0 - vartheta)).sqrt())
        }
        Model::Normal => {
            let d = theta - vartheta;
            Ok((-d * d / 8.0).exp())
        }
        other => Err(Error::UnsupportedModel(format!(
            "Hellinger affinity needs identically distributed steps, got {}",
            other.name()
        ))),
    }
}
