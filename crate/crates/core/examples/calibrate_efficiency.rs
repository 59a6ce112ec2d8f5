//! Fits Bayes and DBC multipliers to α = 0.1 for θ = (0.3, 0.4, 0.5) and
//! compares their weighted ESS.

use multiseq::fit::{calibrate, CalibrationTarget, ErrorTargets, Evaluator, FitOptions, ParamMap};
use multiseq::{Horizon, Model, TestSpec};

fn main() -> multiseq::Result<()> {
    let alpha = 0.1;
    let template = TestSpec::bayes(
        Model::Bernoulli,
        vec![0.3, 0.4, 0.5],
        vec![1.0 / 3.0; 3],
        &[10.0; 3],
        Horizon::Finite(3000),
    )?;
    let target = CalibrationTarget::new(ErrorTargets::PerHypothesis(vec![alpha; 3]), ParamMap::untied_rows(3));
    let mut ess = Vec::new();
    for (name, ev) in [("Bayes", Evaluator::ExactOptimal), ("DBC", Evaluator::ExactDbc)] {
        let fit = calibrate(&template, &target, ev, &FitOptions::default())?;
        let lam: Vec<f64> = (0..3).map(|i| fit.params.lambdas()[i][(i + 1) % 3]).collect();
        println!(
            "{name:6} λ = {lam:.3?}  α_i = {:.5?}  distance {:.4}  weighted ESS {:.3}",
            fit.report.alpha_i, fit.distance, fit.report.weighted_ess
        );
        ess.push(fit.report.weighted_ess);
    }
    println!("efficiency {:.2}%", 100.0 * ess[0] / ess[1]);
    Ok(())
}
