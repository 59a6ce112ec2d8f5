//! A two-sided test of θ = 0.5 against θ = 0.2 and θ = 0.8 built from three
//! hypotheses, with its OC curve. Each rule uses multipliers fitted to
//! α = β = 0.05.

use multiseq::classic::two_sided_wrap;
use multiseq::lattice::{backward_optimal, dbc_lattice, evaluate};
use multiseq::spec::row_constant_lambdas;
use multiseq::{Horizon, Model, TestSpec};

fn main() -> multiseq::Result<()> {
    let spec = |lam: [f64; 3]| {
        TestSpec::new(
            Model::Bernoulli,
            vec![0.2, 0.5, 0.8],
            vec![0.2, 0.5, 0.8],
            vec![0.25, 0.5, 0.25],
            row_constant_lambdas(&lam),
            Horizon::Finite(3000),
        )
    };
    let (opt_spec, dbc_spec) = (spec([36.54, 60.41, 36.54])?, spec([3.89, 8.01, 3.89])?);
    let grid: Vec<f64> = (10..=18).map(|i| i as f64 / 20.0).collect();
    let opt = evaluate(&backward_optimal(&opt_spec, 3000)?.policy, &opt_spec, &grid)?;
    let dbc = evaluate(&dbc_lattice(&dbc_spec)?, &dbc_spec, &grid)?;
    let (o, d) = (two_sided_wrap(&opt, 1)?, two_sided_wrap(&dbc, 1)?);
    println!("optimal: α = {:.4}, β = {:.4?}", o.alpha, o.beta);
    println!("DBC:     α = {:.4}, β = {:.4?}", d.alpha, d.beta);
    println!("   θ   OC opt  ESS opt   OC DBC  ESS DBC");
    for &t in &grid {
        let a = o.curve.iter().find(|p| p.theta == t).expect("grid point");
        let b = d.curve.iter().find(|p| p.theta == t).expect("grid point");
        println!("{t:.2}   {:.3}   {:7.2}   {:.3}   {:7.2}", a.oc, a.ess, b.oc, b.ess);
    }
    Ok(())
}
