use crate::error::{Error, Result};
use crate::models::{bernoulli_log_density, Model};

/// Running log-densities of the observed prefix under every hypothesis and
/// every ESS evaluation point. This is the whole input of every stopping and
/// decision rule in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikState {
    pub n: usize,
    pub logf_theta: Vec<f64>,
    pub logf_eval: Vec<f64>,
}

impl LogLikState {
    /// State before any observation: n = 0 and all densities equal 1.
    pub fn initial(k: usize, num_evals: usize) -> Self {
        LogLikState {
            n: 0,
            logf_theta: vec![0.0; k],
            logf_eval: vec![0.0; num_evals],
        }
    }

    /// Appends observation `x`, advancing `n` by one.
    pub fn observe(&mut self, model: &Model, thetas: &[f64], evals: &[f64], x: f64) -> Result<()> {
        if thetas.len() != self.logf_theta.len() {
            return Err(Error::Dimension {
                what: "hypotheses",
                expected: self.logf_theta.len(),
                got: thetas.len(),
            });
        }
        if evals.len() != self.logf_eval.len() {
            return Err(Error::Dimension {
                what: "evaluation points",
                expected: self.logf_eval.len(),
                got: evals.len(),
            });
        }
        let t = self.n + 1;
        for (l, &theta) in self.logf_theta.iter_mut().zip(thetas) {
            *l += model.log_density_increment(theta, x, t)?;
        }
        for (l, &theta) in self.logf_eval.iter_mut().zip(evals) {
            *l += model.log_density_increment(theta, x, t)?;
        }
        self.n = t;
        Ok(())
    }

    /// Bernoulli state after `n` observations with `s` successes, in any order.
    pub fn bernoulli(n: usize, s: usize, thetas: &[f64], evals: &[f64]) -> Self {
        LogLikState {
            n,
            logf_theta: thetas.iter().map(|&t| bernoulli_log_density(n, s, t)).collect(),
            logf_eval: evals.iter().map(|&t| bernoulli_log_density(n, s, t)).collect(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.logf_theta
            .iter()
            .chain(&self.logf_eval)
            .all(|v| !v.is_nan() && *v != f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observe_increments_n() {
        let m = Model::Bernoulli;
        let th = [0.3, 0.5];
        let ev = [0.4];
        let mut st = LogLikState::initial(2, 1);
        for x in [1.0, 0.0, 1.0, 1.0] {
            st.observe(&m, &th, &ev, x).unwrap();
        }
        let closed = LogLikState::bernoulli(4, 3, &th, &ev);
        assert_eq!(st.n, 4);
        for (a, b) in st.logf_theta.iter().zip(&closed.logf_theta) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(st.is_valid());
    }

    #[test]
    fn dimension_mismatch() {
        let mut st = LogLikState::initial(2, 1);
        assert!(st.observe(&Model::Bernoulli, &[0.3], &[0.4], 1.0).is_err());
        assert_eq!(st.n, 0);
    }
}
