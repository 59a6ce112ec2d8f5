//! Normal observations with mean θ·n: DBC test against an MSPRT, by
//! simulation.

use multiseq::classic::MsprtRule;
use multiseq::montecarlo::Simulator;
use multiseq::{Horizon, Model, TestSpec};

fn main() -> multiseq::Result<()> {
    let reps = 100_000;
    let seed = 20240601;
    let spec = TestSpec::bayes(
        Model::NormalTrend,
        vec![0.0, -0.2, 0.1],
        vec![1.0 / 3.0; 3],
        &[35.0, 18.0, 33.0],
        Horizon::Unbounded,
    )?;
    let grid = [-0.2, -0.1, 0.0, 0.05, 0.1];
    let cap = spec.horizon().cap();
    let dbc = Simulator::dbc(&spec).simulate(&grid, reps, seed, cap)?;
    let ms = Simulator::with_rule(&spec, Box::new(MsprtRule::uniform(3, 4.6)?)).simulate(&grid, reps, seed, cap)?;
    let (sd, sm) = (dbc.se.as_ref().expect("se"), ms.se.as_ref().expect("se"));
    println!("    θ    DBC ESS (SE)        MSPRT ESS (SE)");
    for &t in &grid {
        let i = dbc.params.iter().position(|p| p.theta == t).expect("simulated");
        let j = ms.params.iter().position(|p| p.theta == t).expect("simulated");
        println!(
            "{t:5}   {:.3} ({:.4})   {:.3} ({:.4})",
            dbc.params[i].ess, sd.ess[i], ms.params[j].ess, sm.ess[j]
        );
    }
    println!("DBC errors:   {:?}", dbc.alpha);
    println!("MSPRT errors: {:?}", ms.alpha);
    Ok(())
}
