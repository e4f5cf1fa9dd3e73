//! Monte Carlo wavefunction unravelling of spontaneous emission, against the
//! density-matrix map with the same emission probability.

use kickrotor::decoherence::{mc_wavefunction_run, run_decohered, DecoherenceModel, EmissionModel, McOptions, RecoilMode};
use kickrotor::pulse::KickConfig;
use kickrotor::quantum::{build_period_operator, initial_density, MomentumBasis};

fn main() -> kickrotor::Result<()> {
    let realizations = std::env::args().nth(1).map_or(500, |a| a.parse().expect("realizations must be an integer"));
    let (k, eta, kicks) = (280.0, 0.05, 70);
    let cfg = KickConfig::with_k(k);
    let basis = MomentumBasis::new(128, cfg.hbar, 0.0)?;
    let u = build_period_operator(&cfg, &basis)?;
    let dm = run_decohered(&initial_density(&cfg, &basis)?, &u, DecoherenceModel::SpontaneousEmission { eta }, kicks)?;

    let opts = McOptions { realizations, seed: 2024, ..Default::default() };
    let continuous = mc_wavefunction_run(&cfg, &basis, EmissionModel::continuous(eta), kicks, &opts)?;
    let discrete = mc_wavefunction_run(&cfg, &basis, EmissionModel { eta, recoil_mode: RecoilMode::Discrete }, kicks, &opts)?;

    println!("K = {k}, eta = {eta}, {realizations} realizations, {} emissions", continuous.emissions);
    println!("kick,density_matrix,mc_continuous,stderr,mc_discrete,stderr");
    for t in (0..=kicks).step_by(10) {
        println!(
            "{t},{:.4},{:.4},{:.4},{:.4},{:.4}",
            dm.outside_fraction[t],
            continuous.outside_mean[t],
            continuous.outside_stderr[t],
            discrete.outside_mean[t],
            discrete.outside_stderr[t]
        );
    }
    Ok(())
}
