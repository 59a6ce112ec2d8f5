//! Group-sequential test of m = −0.1 against m = 0.1 with ten groups of 40
//! normal observations, weighted over nine means (criterion F4).

use multiseq::montecarlo::Simulator;
use multiseq::spec::row_constant_lambdas;
use multiseq::{Horizon, Model, TestSpec};

fn main() -> multiseq::Result<()> {
    let evals: Vec<f64> = (1..=9).map(|i| 0.05 * (i as f64 - 5.0)).collect();
    let mut gammas = vec![0.1; 9];
    gammas[4] = 0.2;
    let spec = TestSpec::new(
        Model::GroupedNormal { group_size: 40 },
        vec![-0.1, 0.1],
        evals,
        gammas,
        row_constant_lambdas(&[5.385, 5.385]),
        Horizon::Finite(10),
    )?;
    let r = Simulator::dbc(&spec).simulate(&[], 200_000, 20240601, 10)?;
    let se = r.se.as_ref().expect("se");
    println!("α = {:.4} ({:.4}), β = {:.4} ({:.4})", r.alpha_i[0], se.alpha_i[0], r.alpha_i[1], se.alpha_i[1]);
    for (p, e) in r.params.iter().zip(&se.ess) {
        println!("  E_{:+.2} n = {:7.2} ({:.2})", p.theta, p.ess, e);
    }
    println!("weighted ESS {:.2} ({:.2}); optimal test 149.0", r.weighted_ess, se.weighted_ess);
    Ok(())
}
