//! With two hypotheses and ϑ = θ the DBC test is a Wald SPRT; this walks the
//! lattice and confirms both rules act identically.

use multiseq::classic::sprt_from_lagrange;
use multiseq::{dbc_verdict, Horizon, LogLikState, Model, SequentialRule, TestSpec};

fn main() -> multiseq::Result<()> {
    let (l1, l2, g1) = (40.0, 25.0, 0.4);
    let thetas = vec![0.4, 0.6];
    let spec = TestSpec::bayes(Model::Bernoulli, thetas.clone(), vec![g1, 1.0 - g1], &[l1, l2], Horizon::Finite(60))?;
    let sprt = sprt_from_lagrange(l1, l2, g1, 1.0 - g1)?;
    println!("SPRT thresholds A = {:.5}, B = {:.5}", sprt.a, sprt.b);
    let mut states = 0;
    for n in 1..=60 {
        for s in 0..=n {
            let st = LogLikState::bernoulli(n, s, &thetas, &thetas);
            assert_eq!(dbc_verdict(&st, &spec), sprt.verdict(&st), "n = {n}, s = {s}");
            states += 1;
        }
    }
    println!("{states} lattice states: identical verdicts");
    Ok(())
}
