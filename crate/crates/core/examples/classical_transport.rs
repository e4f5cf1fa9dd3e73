//! Classical ensembles over a range of K, with the flux fitted to each
//! outside-fraction curve.

use kickrotor::classical::{propagate_ensemble, sample_initial};
use kickrotor::diffusion::fit_flux;
use kickrotor::pulse::KickConfig;

fn main() -> kickrotor::Result<()> {
    let (trajectories, kicks, seed) = (100_000, 70, 2024);
    println!("K,P_out(10),P_out(70),F,a,window,residual,accepted,outer_crossings");
    for k in [120.0, 150.0, 180.0, 210.0, 250.0, 280.0] {
        let cfg = KickConfig::with_k(k);
        let run = propagate_ensemble(&sample_initial(&cfg, trajectories, seed)?, &cfg, kicks)?;
        let fit = fit_flux(&run.outside_fraction)?;
        println!(
            "{k},{:.4},{:.4},{:.4},{:.5},{}-{},{:.2e},{},{}",
            run.outside_fraction[10],
            run.outside_fraction[kicks],
            fit.flux,
            fit.rate,
            fit.fit_window.0,
            fit.fit_window.1,
            fit.residual,
            fit.accepted,
            run.outer_crossings
        );
    }
    Ok(())
}
