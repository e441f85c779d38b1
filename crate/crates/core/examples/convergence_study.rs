//! Refinement study on a configuration: ε and δ are halved together.
//!
//!     cargo run --release --example convergence_study -- configs/smoke.cfg 2

use fracture::diagnostics::run_convergence_study;
use fracture::io::parse_config;

fn main() -> fracture::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "configs/smoke.cfg".into());
    let refine: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let cfg = parse_config(&std::fs::read_to_string(path)?)?;
    let study = run_convergence_study(&cfg, refine)?;
    println!(
        "{:>10} {:>6} {:>10} {:>12} {:>10}",
        "eps", "steps", "length", "crack en.", "max en."
    );
    for r in &study.rows {
        println!(
            "{:>10.6} {:>6} {:>10.4} {:>12.4} {:>10.4}",
            r.eps, r.n_steps, r.crack_length, r.crack_energy, r.max_energy
        );
    }
    println!(
        "last-pair change {:.3}, energy bound ok {}",
        study.last_pair_change, study.energy_bound_ok
    );
    Ok(())
}
