mod common;

use common::{close, perturbed, random_spec, rng};
use multiseq::dbc::lagrangian;
use multiseq::lattice::{backward_optimal, brute_force_policy, brute_force_rule, dbc_lattice, evaluate};
use multiseq::{dbc_verdict, DbcRule, LogLikState, TestReport};
use rand::Rng;

fn assert_reports_match(a: &TestReport, b: &TestReport, rel: f64) {
    for (ra, rb) in a.alpha.iter().zip(&b.alpha) {
        for (x, y) in ra.iter().zip(rb) {
            assert!(close(*x, *y, rel), "alpha {x} vs {y}");
        }
    }
    assert_eq!(a.params.len(), b.params.len());
    for (p, q) in a.params.iter().zip(&b.params) {
        assert!(close(p.ess, q.ess, rel), "ess {} vs {} at {}", p.ess, q.ess, p.theta);
    }
    assert!(close(a.weighted_ess, b.weighted_ess, rel));
}

#[test]
fn lattice_matches_path_enumeration() {
    let mut r = rng(11);
    for _ in 0..25 {
        let n = r.random_range(1..=12);
        let spec = random_spec(&mut r, n);
        let extra = [r.random_range(0.05..0.95)];
        let lattice = evaluate(&dbc_lattice(&spec).unwrap(), &spec, &extra).unwrap();
        let oracle = brute_force_rule(&DbcRule::new(&spec), &spec, n, &extra).unwrap();
        assert_reports_match(&lattice, &oracle, 1e-10);
    }
}

#[test]
fn optimal_policy_evaluation_matches_enumeration() {
    let mut r = rng(12);
    for _ in 0..10 {
        let n = r.random_range(1..=12);
        let spec = random_spec(&mut r, n);
        let opt = backward_optimal(&spec, n).unwrap();
        let lattice = evaluate(&opt.policy, &spec, &[]).unwrap();
        let oracle = brute_force_policy(&opt.policy, &spec, &[]).unwrap();
        assert_reports_match(&lattice, &oracle, 1e-10);
    }
}

#[test]
fn minimal_lagrangian_is_the_lagrangian_of_the_optimal_policy() {
    let mut r = rng(13);
    for _ in 0..10 {
        let n = r.random_range(5..=40);
        let spec = random_spec(&mut r, n);
        let opt = backward_optimal(&spec, n).unwrap();
        let l = lagrangian(&evaluate(&opt.policy, &spec, &[]).unwrap(), &spec);
        assert!(close(l, opt.minimal_lagrangian, 1e-10), "{l} vs {}", opt.minimal_lagrangian);
    }
}

#[test]
fn dbc_stops_imply_optimal_stops() {
    let mut r = rng(14);
    for _ in 0..10 {
        let n = r.random_range(5..=60);
        let spec = random_spec(&mut r, n);
        let opt = backward_optimal(&spec, n).unwrap();
        let mut checked = 0;
        for (step, s, a) in opt.policy.cells() {
            let st = LogLikState::bernoulli(step, s, spec.thetas(), spec.evals());
            if dbc_verdict(&st, &spec).is_stopped() {
                assert!(a.is_stop(), "DBC stops at ({step}, {s}) but the optimal rule continues");
            }
            checked += 1;
        }
        assert!(checked > 0);
    }
}

#[test]
fn no_perturbation_beats_the_optimal_policy() {
    let mut r = rng(15);
    for _ in 0..10 {
        let n = r.random_range(5..=30);
        let spec = random_spec(&mut r, n);
        let opt = backward_optimal(&spec, n).unwrap();
        for _ in 0..100 {
            let p = perturbed(&spec, &opt.policy, &mut r);
            let l = lagrangian(&evaluate(&p, &spec, &[]).unwrap(), &spec);
            assert!(l >= opt.minimal_lagrangian * (1.0 - 1e-12), "{l} < {}", opt.minimal_lagrangian);
        }
    }
}

#[test]
fn minimal_lagrangian_decreases_with_the_horizon() {
    let mut r = rng(16);
    for _ in 0..10 {
        let spec = random_spec(&mut r, 40);
        let values: Vec<f64> = [5, 10, 20, 40]
            .iter()
            .map(|&n| backward_optimal(&spec, n).unwrap().minimal_lagrangian)
            .collect();
        assert!(
            values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
            "{values:?}"
        );
    }
}

