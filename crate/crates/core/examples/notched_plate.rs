//! Opens a notched plate in mode I and prints the energy and crack length per step.
//!
//!     cargo run --release --example notched_plate [config]

use fracture::diagnostics::check_energy_balance;
use fracture::io::{parse_config, run_config};

fn main() -> fracture::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "configs/notched_plate.cfg".into());
    let cfg = parse_config(&std::fs::read_to_string(&path)?)?;
    let trace = run_config(&cfg)?;
    let balance = check_energy_balance(&trace, &cfg.load()?, &cfg.material()?)?;

    println!(
        "{:>4} {:>7} {:>10} {:>10} {:>10} {:>8}",
        "k", "t", "elastic", "crack", "length", "slack"
    );
    for (s, b) in trace.steps.iter().zip(&balance.rows) {
        println!(
            "{:>4} {:>7.3} {:>10.4} {:>10.4} {:>10.4} {:>8.1e}",
            s.k, s.t, s.energy.elastic_part, s.energy.crack_part, s.k_length, b.slack
        );
    }
    println!(
        "beta_fit {:.2e}, irreversible {}",
        balance.beta_fit,
        trace.irreversible()
    );
    Ok(())
}
