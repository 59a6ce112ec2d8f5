#![allow(dead_code)]

use multiseq::{dbc_verdict, Action, DbcRule, Horizon, LatticePolicy, LogLikState, Model, TestSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sorted, pairwise separated success probabilities.
pub fn separated(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[1] - w[0] > 0.05) {
            return t;
        }
    }
}

/// A random Bernoulli spec with 2–4 hypotheses, 1–3 ESS points, log-uniform
/// multipliers in [2, 200] and the given horizon.
pub fn random_spec(rng: &mut ChaCha8Rng, horizon: usize) -> TestSpec {
    let k = rng.random_range(2..=4);
    let m = rng.random_range(1..=3);
    let thetas = separated(rng, k);
    let evals: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..0.95)).collect();
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let gammas = w.iter().map(|x| x / total).collect();
    let lambdas = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { 0.0 } else { rng.random_range(2f64.ln()..200f64.ln()).exp() })
                .collect()
        })
        .collect();
    TestSpec::new(Model::Bernoulli, thetas, evals, gammas, lambdas, Horizon::Finite(horizon)).unwrap()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300
}

/// The optimal policy with random cells flipped; states that become
/// reachable take the DBC action.
pub fn perturbed(spec: &TestSpec, opt: &LatticePolicy, r: &mut impl Rng) -> LatticePolicy {
    let k = spec.k();
    LatticePolicy::from_rule(opt.horizon(), |n, s, last| {
        let base = opt.action(n, s).unwrap_or_else(|| {
            let st = LogLikState::bernoulli(n, s, spec.thetas(), spec.evals());
            let rule = DbcRule::new(spec);
            if last {
                Action::Stop(rule.decision(&st.logf_theta))
            } else {
                dbc_verdict(&st, spec).into()
            }
        });
        if !r.random_bool(0.15) {
            return base;
        }
        match base {
            Action::Stop(_) if !last => Action::Continue,
            Action::Stop(j) => Action::Stop((j + 1) % k),
            Action::Continue => Action::Stop(r.random_range(0..k)),
        }
    })
    .unwrap()
}

