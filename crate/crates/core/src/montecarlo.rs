//! Seeded Monte Carlo evaluation of sequential rules.
//!
//! Replication r under seed s draws from `ChaCha8Rng::seed_from_u64(s)`
//! switched to stream r, so every replication owns an independent,
//! addressable random sequence. Normal variates come from the ziggurat
//! sampler of `rand_distr`. Per-replication results are folded into integer
//! tallies, which makes the report bit-identical for any thread count. The
//! same streams serve every true parameter (common random numbers).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dbc::{DbcRule, SequentialRule};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::report::{ParamSe, ParamSummary, TestReport};
use crate::spec::TestSpec;
use crate::state::LogLikState;

const CHUNK: u64 = 2048;

/// Run parameters for one true parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub reps: u64,
    pub seed: u64,
    /// Hard truncation in steps; reaching it stops with the rule's terminal
    /// decision.
    pub cap: usize,
    pub true_param: f64,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Spec("at least one replication is required".into()));
        }
        if self.cap == 0 {
            return Err(Error::Spec("the cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// A rule bound to the model and parameter sets its states are built from.
pub struct Simulator<'a> {
    pub model: Model,
    pub thetas: Vec<f64>,
    pub evals: Vec<f64>,
    /// Weights of `evals` in the weighted ESS of assembled reports.
    pub gammas: Vec<f64>,
    rule: Box<dyn SequentialRule + 'a>,
}

/// Raw tallies of one simulated parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTally {
    pub theta: f64,
    pub reps: u64,
    pub accept: Vec<u64>,
    /// `stopped_at[n-1]` = replications with τ = n, up to the largest τ seen.
    pub stopped_at: Vec<u64>,
    pub cap_hits: u64,
    pub sum_tau: u64,
    pub sum_tau2: u128,
}

impl SimTally {
    fn empty(theta: f64, k: usize) -> Self {
        SimTally {
            theta,
            reps: 0,
            accept: vec![0; k],
            stopped_at: Vec::new(),
            cap_hits: 0,
            sum_tau: 0,
            sum_tau2: 0,
        }
    }

    fn merge(mut self, other: SimTally) -> SimTally {
        self.reps += other.reps;
        for (a, b) in self.accept.iter_mut().zip(&other.accept) {
            *a += b;
        }
        if self.stopped_at.len() < other.stopped_at.len() {
            self.stopped_at.resize(other.stopped_at.len(), 0);
        }
        for (a, b) in self.stopped_at.iter_mut().zip(&other.stopped_at) {
            *a += b;
        }
        self.cap_hits += other.cap_hits;
        self.sum_tau += other.sum_tau;
        self.sum_tau2 += other.sum_tau2;
        self
    }

    /// Empirical survival P̂(τ > n) for n = 1..=max τ.
    pub fn tail_curve(&self) -> Vec<(usize, f64)> {
        let mut remaining = self.reps;
        self.stopped_at
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                remaining -= c;
                (i + 1, remaining as f64 / self.reps as f64)
            })
            .collect()
    }

    /// Estimates in steps scaled by `obs_per_step`.
    pub fn summary(&self, obs_per_step: usize) -> (ParamSummary, ParamSe) {
        let r = self.reps as f64;
        let scale = obs_per_step as f64;
        let accept: Vec<f64> = self.accept.iter().map(|&c| c as f64 / r).collect();
        let accept_se = accept.iter().map(|&p| (p * (1.0 - p) / r).sqrt()).collect();
        let mean = self.sum_tau as f64 / r;
        let var = if self.reps > 1 {
            let ss = self.sum_tau2 as f64 - r * mean * mean;
            (ss / (r - 1.0)).max(0.0)
        } else {
            0.0
        };
        let summary = ParamSummary {
            theta: self.theta,
            accept,
            ess: mean * scale,
            stop_dist: self.stopped_at.iter().map(|&c| c as f64 / r).collect(),
            horizon_mass: self.cap_hits as f64 / r,
        };
        let se = ParamSe {
            accept: accept_se,
            ess: (var / r).sqrt() * scale,
        };
        (summary, se)
    }
}

impl<'a> Simulator<'a> {
    pub fn new(
        model: Model,
        thetas: Vec<f64>,
        evals: Vec<f64>,
        gammas: Vec<f64>,
        rule: Box<dyn SequentialRule + 'a>,
    ) -> Result<Self> {
        model.validate()?;
        for &t in thetas.iter().chain(&evals) {
            model.check_parameter(t)?;
        }
        if gammas.len() != evals.len() {
            return Err(Error::Dimension {
                what: "weights",
                expected: evals.len(),
                got: gammas.len(),
            });
        }
        Ok(Simulator {
            model,
            thetas,
            evals,
            gammas,
            rule,
        })
    }

    /// The DBC rule of `spec`.
    pub fn dbc(spec: &TestSpec) -> Self {
        Simulator {
            model: spec.model(),
            thetas: spec.thetas().to_vec(),
            evals: spec.evals().to_vec(),
            gammas: spec.gammas().to_vec(),
            rule: Box::new(DbcRule::new(spec)),
        }
    }

    /// Any rule reading hypothesis densities only, reported with the weights
    /// and evaluation points of `spec`.
    pub fn with_rule(spec: &TestSpec, rule: Box<dyn SequentialRule + 'a>) -> Self {
        Simulator {
            model: spec.model(),
            thetas: spec.thetas().to_vec(),
            evals: spec.evals().to_vec(),
            gammas: spec.gammas().to_vec(),
            rule,
        }
    }

    pub fn k(&self) -> usize {
        self.thetas.len()
    }

    /// One replication on an explicit generator: (τ, accepted, cap hit).
    pub fn run_one(&self, rng: &mut ChaCha8Rng, true_param: f64, cap: usize) -> Result<(usize, usize, bool)> {
        let mut st = LogLikState::initial(self.k(), self.evals.len());
        loop {
            let t = st.n + 1;
            let x = self.model.sample(true_param, t, rng);
            st.observe(&self.model, &self.thetas, &self.evals, x)?;
            if let Some(j) = self.rule.verdict(&st).accepted() {
                return Ok((st.n, j, false));
            }
            if st.n >= cap {
                return Ok((st.n, self.rule.terminal_decision(&st), true));
            }
        }
    }

    fn run_chunk(&self, cfg: &SimConfig, lo: u64, hi: u64) -> Result<SimTally> {
        let mut tally = SimTally::empty(cfg.true_param, self.k());
        for r in lo..hi {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r);
            let (tau, j, hit) = self.run_one(&mut rng, cfg.true_param, cfg.cap)?;
            tally.reps += 1;
            tally.accept[j] += 1;
            if tally.stopped_at.len() < tau {
                tally.stopped_at.resize(tau, 0);
            }
            tally.stopped_at[tau - 1] += 1;
            tally.cap_hits += hit as u64;
            tally.sum_tau += tau as u64;
            tally.sum_tau2 += (tau as u128) * (tau as u128);
        }
        Ok(tally)
    }

    /// Replications under one true parameter.
    pub fn tally(&self, cfg: &SimConfig) -> Result<SimTally> {
        cfg.validate()?;
        self.model.check_parameter(cfg.true_param)?;
        let chunks = cfg.reps.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| self.run_chunk(cfg, c * CHUNK, ((c + 1) * CHUNK).min(cfg.reps)))
            .try_reduce(
                || SimTally::empty(cfg.true_param, self.k()),
                |a, b| Ok(a.merge(b)),
            )
    }

    /// Report covering the hypotheses, evaluation points and `extra`
    /// parameters, each simulated with `reps` replications of the same seed.
    pub fn simulate(&self, extra: &[f64], reps: u64, seed: u64, cap: usize) -> Result<TestReport> {
        let mut params: Vec<f64> = Vec::new();
        for &t in self.thetas.iter().chain(&self.evals).chain(extra) {
            if !params.contains(&t) {
                params.push(t);
            }
        }
        let obs = self.model.observations_per_step();
        let mut summaries = Vec::with_capacity(params.len());
        let mut ses = Vec::with_capacity(params.len());
        for &t in &params {
            let tally = self.tally(&SimConfig {
                reps,
                seed,
                cap,
                true_param: t,
            })?;
            let (s, e) = tally.summary(obs);
            summaries.push(s);
            ses.push(e);
        }
        TestReport::assemble_parts(&self.thetas, &self.evals, &self.gammas, summaries, Some(ses), Some(reps))
    }
}

/// Monte Carlo report of the DBC rule of `spec`, truncated at the spec's
/// horizon (or its safety cap).
pub fn simulate(spec: &TestSpec, extra: &[f64], reps: u64, seed: u64) -> Result<TestReport> {
    Simulator::dbc(spec).simulate(extra, reps, seed, spec.horizon().cap())
}

/// Empirical survival function of τ under `cfg`.
pub fn tail_curve(sim: &Simulator, cfg: &SimConfig) -> Result<Vec<(usize, f64)>> {
    Ok(sim.tally(cfg)?.tail_curve())
}
