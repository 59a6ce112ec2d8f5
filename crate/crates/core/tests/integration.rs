use multiseq::classic::{two_sprt, MsprtRule};
use multiseq::fit::{calibrate, nelder_mead, CalibrationTarget, ErrorTargets, Evaluator, FitOptions, NelderMeadOptions, ParamMap};
use multiseq::kiefer_weiss::{ess_argmax, kw_fixed_point, ArgmaxOptions, KwOptions};
use multiseq::lattice::{dbc_lattice, evaluate};
use multiseq::montecarlo::simulate;
use multiseq::scenarios::example5_spec;
use multiseq::spec::row_constant_lambdas;
use multiseq::{dbc_verdict, Horizon, LatticePolicy, LogLikState, Model, SequentialRule, TestReport, TestSpec};

fn three_point(horizon: usize) -> TestSpec {
    TestSpec::bayes(
        Model::Bernoulli,
        vec![0.3, 0.4, 0.5],
        vec![1.0 / 3.0; 3],
        &[8.0, 20.0, 9.0],
        Horizon::Finite(horizon),
    )
    .unwrap()
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let spec = three_point(150);
    let exact = evaluate(&dbc_lattice(&spec).unwrap(), &spec, &[0.35]).unwrap();
    let reps = 40_000;
    let mc = simulate(&spec, &[0.35], reps, 7).unwrap();
    let se = mc.se.as_ref().unwrap();
    let floor = 1.0 / reps as f64;
    for i in 0..3 {
        for j in 0..3 {
            let d = (mc.alpha[i][j] - exact.alpha[i][j]).abs();
            assert!(d <= 4.0 * se.alpha[i][j].max(floor), "alpha[{i}][{j}]: {d}");
        }
    }
    for (k, p) in exact.params.iter().enumerate() {
        let q = mc.param(p.theta).unwrap();
        assert!((q.ess - p.ess).abs() <= 4.0 * se.ess[k], "ESS at {}: {} vs {}", p.theta, q.ess, p.ess);
    }
}

#[test]
fn simulation_is_independent_of_thread_count() {
    let spec = three_point(150);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&spec, &[], 9000, 11).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
}

#[test]
fn json_round_trips() {
    let spec = three_point(60);
    assert_eq!(TestSpec::from_json(&spec.to_json().unwrap()).unwrap(), spec);

    let policy = dbc_lattice(&spec).unwrap();
    let back = LatticePolicy::from_json(&policy.to_json().unwrap()).unwrap();
    assert_eq!(back, policy);

    for report in [
        evaluate(&policy, &spec, &[0.45]).unwrap(),
        simulate(&spec, &[0.45], 3000, 1).unwrap(),
    ] {
        assert_eq!(TestReport::from_json(&report.to_json().unwrap()).unwrap(), report);
    }

    let msprt = MsprtRule::new(vec![vec![0.0, 1.25, -0.5], vec![2.0, 0.0, 0.1], vec![3.0, 1e-300, 0.0]]).unwrap();
    let text = serde_json::to_string(&msprt).unwrap();
    assert_eq!(MsprtRule::from_json(&text).unwrap(), msprt);
}

#[test]
fn nelder_mead_rosenbrock() {
    let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
    let opts = NelderMeadOptions {
        max_evals: 5000,
        ..Default::default()
    };
    let m = nelder_mead(rosen, &[-1.2, 1.0], &opts).unwrap();
    assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    assert!(m.evals <= 5000);
}

#[test]
fn calibration_keeps_a_spec_that_already_meets_its_targets() {
    let spec = three_point(120);
    let achieved = Evaluator::ExactDbc.evaluate(&spec).unwrap().alpha_i;
    let target = CalibrationTarget::new(ErrorTargets::PerHypothesis(achieved), ParamMap::untied_rows(3));
    let opts = FitOptions {
        from_template: true,
        ..Default::default()
    };
    let fit = calibrate(&spec, &target, Evaluator::ExactDbc, &opts).unwrap();
    assert!(fit.converged);
    assert_eq!(fit.distance, 0.0);
    for (a, b) in fit.params.lambdas().iter().flatten().zip(spec.lambdas().iter().flatten()) {
        assert!((a - b).abs() <= 1e-12 * b.abs());
    }
}

fn kw_options() -> KwOptions {
    KwOptions {
        max_rounds: 6,
        fit: FitOptions {
            from_template: true,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn kw_degenerate_fixed_point_stops_after_one_round() {
    // Place ϑ at the maxima of the design it produces, then ask for the
    // errors it already has.
    let mut spec = example5_spec(Horizon::Finite(600)).unwrap();
    for _ in 0..4 {
        let policy = dbc_lattice(&spec).unwrap();
        let peaks = ess_argmax(&policy, 3, 0.3, 0.7, &ArgmaxOptions::default()).unwrap();
        spec = spec.with_evals(peaks.iter().map(|p| p.0).collect(), vec![0.5, 0.5]).unwrap();
    }
    let achieved = Evaluator::ExactDbc.evaluate(&spec).unwrap().alpha_i;
    let target = CalibrationTarget::new(ErrorTargets::PerHypothesis(achieved), ParamMap::symmetric_rows(3));
    let design = kw_fixed_point(&spec, &target, &kw_options()).unwrap();
    assert!(design.converged, "gap {}", design.fixed_point_gap);
    assert_eq!(design.rounds, 1);
}

#[test]
fn kw_worst_points_are_symmetric() {
    let spec = example5_spec(Horizon::Finite(600)).unwrap();
    let policy = dbc_lattice(&spec).unwrap();
    let opts = ArgmaxOptions::default();
    let peaks = ess_argmax(&policy, 3, 0.3, 0.7, &opts).unwrap();
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0].0 + peaks[1].0 - 1.0).abs() <= 2.0 * opts.refine_tol);
    assert!((peaks[0].1 - peaks[1].1).abs() < 1e-3);
    for i in 1..200 {
        let t = 0.3 + 0.002 * i as f64;
        let e = multiseq::lattice::evaluate_param(&policy, 3, t).unwrap().ess;
        assert!(e <= peaks[0].1 + 1e-9, "ESS {e} at {t} above the maximum");
    }
}

#[test]
fn kw_with_two_hypotheses_is_a_two_sprt() {
    let (t1, t2) = (0.3, 0.7);
    let template = TestSpec::new(
        Model::Bernoulli,
        vec![t1, t2],
        vec![0.5],
        vec![1.0],
        row_constant_lambdas(&[20.0, 20.0]),
        Horizon::Finite(300),
    )
    .unwrap();
    let target = CalibrationTarget::new(ErrorTargets::PerHypothesis(vec![0.05, 0.05]), ParamMap::untied_rows(2));
    let design = kw_fixed_point(&template, &target, &KwOptions::default()).unwrap();
    let spec = &design.spec;
    assert_eq!(spec.evals().len(), 1);
    let (l1, l2) = (spec.lambdas()[0][1], spec.lambdas()[1][0]);
    let rule = two_sprt(l1, l2, t1, t2, spec.evals()[0]).unwrap();
    for n in 1..=300 {
        for s in 0..=n {
            let st = LogLikState::bernoulli(n, s, &[t1, t2], spec.evals());
            assert_eq!(dbc_verdict(&st, spec), rule.verdict(&st), "n={n} s={s}");
        }
    }
}
