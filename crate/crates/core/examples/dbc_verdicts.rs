//! Feeds a short Bernoulli sequence to a three-hypothesis DBC test and prints
//! the posterior and verdict after each observation.

use multiseq::dbc::{posterior, posterior_stop_statistic};
use multiseq::{dbc_verdict, Horizon, LogLikState, Model, TestSpec, Verdict};

fn main() -> multiseq::Result<()> {
    let spec = TestSpec::bayes(
        Model::Bernoulli,
        vec![0.1, 0.3, 0.5],
        vec![0.1, 0.1, 0.8],
        &[60.0, 60.0, 60.0],
        Horizon::Finite(200),
    )?;
    let xs = [1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0].repeat(5);
    let mut st = LogLikState::initial(spec.k(), spec.num_evals());
    println!(" n  x   posterior                 stat    verdict");
    for &x in &xs {
        st.observe(&spec.model(), spec.thetas(), spec.evals(), x)?;
        let pi = posterior(&st, spec.gammas())?;
        let stat = posterior_stop_statistic(&st, &spec)?;
        let v = dbc_verdict(&st, &spec);
        println!(
            "{:2}  {}   {:.4} {:.4} {:.4}   {:7.3}   {}",
            st.n,
            x as u8,
            pi[0],
            pi[1],
            pi[2],
            stat,
            match v {
                Verdict::Continue => "continue".to_string(),
                Verdict::Accept(j) => format!("accept H{}", j + 1),
            }
        );
        if v.is_stopped() {
            break;
        }
    }
    Ok(())
}
