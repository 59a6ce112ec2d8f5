//! Runs one of the reference studies and prints the comparison table.
//!
//! cargo run --release --example scenario_catalog -- example5_kw

use multiseq::scenarios::{run_scenario, Overrides, CATALOG};

fn main() -> multiseq::Result<()> {
    let Some(id) = std::env::args().nth(1) else {
        for s in CATALOG {
            println!("{:16} {}", s.id, s.title);
        }
        return Ok(());
    };
    let t = std::time::Instant::now();
    let outcome = run_scenario(&id, &Overrides::default())?;
    print!("{}", outcome.render());
    println!("({:.1} s)", t.elapsed().as_secs_f64());
    Ok(())
}
