use multiseq::classic::{msprt_verdict, sprt_from_lagrange, two_sprt, MsprtRule};
use multiseq::dbc::{log_risk_candidates, log_weighted_density, posterior_stop_statistic};
use multiseq::numeric::{log_add_exp, log_sum_exp};
use multiseq::spec::row_constant_lambdas;
use multiseq::{dbc_verdict, Horizon, LogLikState, Model, SequentialRule, TestSpec, Verdict};
use proptest::prelude::*;

fn spec3() -> impl Strategy<Value = TestSpec> {
    (
        prop::collection::vec(0.05f64..0.95, 3),
        prop::collection::vec(0.1f64..1.0, 3),
        prop::collection::vec(0.5f64..300.0, 6),
    )
        .prop_filter_map("distinct hypotheses", |(mut t, w, l)| {
            t.sort_by(f64::total_cmp);
            if t.windows(2).any(|p| p[1] - p[0] < 0.01) {
                return None;
            }
            let total: f64 = w.iter().sum();
            let g = w.iter().map(|x| x / total).collect();
            let lam = vec![vec![0.0, l[0], l[1]], vec![l[2], 0.0, l[3]], vec![l[4], l[5], 0.0]];
            TestSpec::new(Model::Bernoulli, t.clone(), t, g, lam, Horizon::Finite(100)).ok()
        })
}

fn state3() -> impl Strategy<Value = LogLikState> {
    (1usize..500, prop::collection::vec(-60.0f64..0.0, 3)).prop_map(|(n, l)| LogLikState {
        n,
        logf_eval: l.clone(),
        logf_theta: l,
    })
}

proptest! {
    #[test]
    fn log_sum_exp_shift(xs in prop::collection::vec(-700.0f64..700.0, 1..8), c in -300.0f64..300.0) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let a = log_sum_exp(&shifted);
        let b = log_sum_exp(&xs) + c;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(log_sum_exp(&xs) >= m);
        prop_assert!(log_sum_exp(&xs) <= m + (xs.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn log_add_exp_matches_direct(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let direct = (a.exp() + b.exp()).ln();
        prop_assert!((log_add_exp(a, b) - direct).abs() < 1e-12);
        prop_assert_eq!(log_add_exp(a, b), log_add_exp(b, a));
    }

    #[test]
    fn common_density_factor_is_irrelevant(spec in spec3(), st in state3(), c in -200.0f64..200.0) {
        let mut moved = st.clone();
        for l in moved.logf_theta.iter_mut().chain(moved.logf_eval.iter_mut()) {
            *l += c;
        }
        let (a, b) = (dbc_verdict(&st, &spec), dbc_verdict(&moved, &spec));
        if a != b {
            // Only a state on the stopping boundary may flip under rounding.
            let v = log_risk_candidates(&st, spec.lambdas()).unwrap();
            let f = log_weighted_density(&st, spec.gammas()).unwrap();
            let m = v.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!((m - f).abs() < 1e-9 || v.iter().filter(|x| (*x - m).abs() < 1e-9).count() > 1);
        }
    }

    #[test]
    fn posterior_form(spec in spec3(), st in state3()) {
        let v = log_risk_candidates(&st, spec.lambdas()).unwrap();
        let f = log_weighted_density(&st, spec.gammas()).unwrap();
        let m = v.iter().copied().fold(f64::INFINITY, f64::min);
        let direct = (m - f).exp();
        let post = posterior_stop_statistic(&st, &spec).unwrap();
        prop_assert!((direct - post).abs() <= 1e-10 * direct.max(post), "{} vs {}", direct, post);
        if (post - 1.0).abs() > 1e-10 {
            prop_assert_eq!(dbc_verdict(&st, &spec).is_stopped(), post <= 1.0);
        }
    }

    #[test]
    fn sprt_thresholds_bracket_the_decision(l1 in 1.0001f64..1e4, l2 in 1.0001f64..1e4, g1 in 0.01f64..0.99) {
        let r = sprt_from_lagrange(l1, l2, g1, 1.0 - g1).unwrap();
        prop_assert!(r.a < l1 / l2 && l1 / l2 < r.b);
    }

    #[test]
    fn two_hypothesis_dbc_is_an_sprt(
        t1 in 0.05f64..0.5, gap in 0.05f64..0.45,
        l1 in 1.5f64..500.0, l2 in 1.5f64..500.0, g1 in 0.05f64..0.95,
    ) {
        let thetas = vec![t1, t1 + gap];
        let spec = TestSpec::bayes(Model::Bernoulli, thetas.clone(), vec![g1, 1.0 - g1], &[l1, l2], Horizon::Finite(50)).unwrap();
        let sprt = sprt_from_lagrange(l1, l2, g1, 1.0 - g1).unwrap();
        let msprt = MsprtRule::new(vec![vec![0.0, sprt.b.ln()], vec![-sprt.a.ln(), 0.0]]).unwrap();
        for n in 1..=50 {
            for s in 0..=n {
                let st = LogLikState::bernoulli(n, s, &thetas, &thetas);
                let v = sprt.verdict(&st);
                prop_assert_eq!(dbc_verdict(&st, &spec), v, "n={} s={}", n, s);
                prop_assert_eq!(msprt_verdict(&st, &msprt), v, "n={} s={}", n, s);
            }
        }
    }

    #[test]
    fn one_point_dbc_is_a_two_sprt(
        t1 in 0.05f64..0.5, gap in 0.05f64..0.45, u in 0.0f64..1.0,
        l1 in 1.5f64..500.0, l2 in 1.5f64..500.0,
    ) {
        let thetas = vec![t1, t1 + gap];
        let vartheta = t1 + u * gap;
        let spec = TestSpec::new(Model::Bernoulli, thetas.clone(), vec![vartheta], vec![1.0], row_constant_lambdas(&[l1, l2]), Horizon::Finite(50)).unwrap();
        let rule = two_sprt(l1, l2, thetas[0], thetas[1], vartheta).unwrap();
        for n in 1..=50 {
            for s in 0..=n {
                let st = LogLikState::bernoulli(n, s, &thetas, &[vartheta]);
                prop_assert_eq!(dbc_verdict(&st, &spec), rule.verdict(&st), "n={} s={}", n, s);
            }
        }
    }
}

#[test]
fn no_stop_before_the_first_observation() {
    let spec = TestSpec::bayes(Model::Bernoulli, vec![0.2, 0.8], vec![0.5, 0.5], &[1.5, 1.5], Horizon::Finite(5)).unwrap();
    assert_eq!(dbc_verdict(&LogLikState::initial(2, 2), &spec), Verdict::Continue);
}
