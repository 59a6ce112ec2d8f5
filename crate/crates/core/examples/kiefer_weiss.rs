//! Worst-case expected sample size of a DBC test for θ = (0.3, 0.5, 0.7)
//! and the fixed-point search that places ϑ at its own ESS maxima.

use multiseq::fit::{CalibrationTarget, ErrorTargets, ParamMap};
use multiseq::kiefer_weiss::{ess_argmax, kw_fixed_point, ArgmaxOptions, KwOptions};
use multiseq::lattice::{dbc_lattice, evaluate};
use multiseq::spec::row_constant_lambdas;
use multiseq::{Horizon, Model, TestSpec};

fn main() -> multiseq::Result<()> {
    let spec = TestSpec::new(
        Model::Bernoulli,
        vec![0.3, 0.5, 0.7],
        vec![0.4026, 0.5974],
        vec![0.5, 0.5],
        row_constant_lambdas(&[6.582, 5.964, 6.582]),
        Horizon::Finite(3000),
    )?;
    let policy = dbc_lattice(&spec)?;
    let r = evaluate(&policy, &spec, &[])?;
    println!("α_i = {:.4?}", r.alpha_i);
    for (t, e) in ess_argmax(&policy, 3, 0.3, 0.7, &ArgmaxOptions::default())? {
        println!("ESS maximum {e:.3} at θ = {t:.5}");
    }

    let target = CalibrationTarget::new(
        ErrorTargets::PerHypothesis(vec![0.037, 0.07, 0.037]),
        ParamMap::symmetric_rows(3),
    );
    let d = kw_fixed_point(&spec, &target, &KwOptions::default())?;
    println!(
        "fixed point after {} rounds (converged: {}): λ = ({:.3}, {:.3}), α_i = {:.4?}, worst points {:.4?}, max ESS {:.3}",
        d.rounds,
        d.converged,
        d.spec.lambdas()[0][1],
        d.spec.lambdas()[1][0],
        d.alpha_i,
        d.worst_points,
        d.max_ess
    );
    Ok(())
}
