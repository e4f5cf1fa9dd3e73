//! Coherent density-matrix evolution next to the classical ensemble.

use kickrotor::classical::{propagate_ensemble, sample_initial};
use kickrotor::pulse::KickConfig;
use kickrotor::quantum::{build_period_operator, evolve_density, initial_density, MomentumBasis};

fn main() -> kickrotor::Result<()> {
    let k = std::env::args().nth(1).map_or(280.0, |a| a.parse().expect("K must be a number"));
    let cfg = KickConfig::with_k(k);
    let basis = MomentumBasis::new(128, cfg.hbar, 0.0)?;
    let u = build_period_operator(&cfg, &basis)?;
    println!("K = {k}, |U'U - I| = {:.1e}", u.unitarity_defect());

    let quantum = evolve_density(&initial_density(&cfg, &basis)?, &u, 70)?;
    let classical = propagate_ensemble(&sample_initial(&cfg, 100_000, 7)?, &cfg, 70)?;

    println!("kick,classical,quantum");
    for t in (0..=70).step_by(5) {
        println!("{t},{:.4},{:.4}", classical.outside_fraction[t], quantum.outside_fraction[t]);
    }
    Ok(())
}
