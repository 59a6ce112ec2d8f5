//! Exact operating characteristics of the DBC test and of the optimal test
//! with the same multipliers, on the Bernoulli lattice.

use multiseq::dbc::lagrangian;
use multiseq::lattice::{backward_optimal, dbc_lattice, evaluate};
use multiseq::{Horizon, Model, TestSpec};

fn main() -> multiseq::Result<()> {
    let spec = TestSpec::bayes(
        Model::Bernoulli,
        vec![0.3, 0.4, 0.5],
        vec![1.0 / 3.0; 3],
        &[200.0, 300.0, 200.0],
        Horizon::Finite(1000),
    )?;
    let dbc = evaluate(&dbc_lattice(&spec)?, &spec, &[0.35, 0.45])?;
    let opt = backward_optimal(&spec, 1000)?;
    let best = evaluate(&opt.policy, &spec, &[0.35, 0.45])?;

    for (name, r) in [("DBC", &dbc), ("optimal", &best)] {
        println!("{name}: weighted ESS {:.3}, Lagrangian {:.4}", r.weighted_ess, lagrangian(r, &spec));
        for (i, row) in r.alpha.iter().enumerate() {
            println!("  θ = {}: accept {:.5?}", r.thetas[i], row);
        }
        for p in &r.params {
            println!("  E_{}τ = {:.3}", p.theta, p.ess);
        }
    }
    println!("minimal Lagrangian from backward induction: {:.4}", opt.minimal_lagrangian);
    Ok(())
}
