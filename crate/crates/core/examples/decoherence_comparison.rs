//! Outside fraction under spontaneous emission and the anti-Zeno map,
//! compared with coherent and classical dynamics.

use kickrotor::classical::{propagate_ensemble, sample_initial};
use kickrotor::decoherence::{run_decohered, DecoherenceModel};
use kickrotor::pulse::KickConfig;
use kickrotor::quantum::{build_period_operator, initial_density, MomentumBasis};

fn main() -> kickrotor::Result<()> {
    let k = std::env::args().nth(1).map_or(280.0, |a| a.parse().expect("K must be a number"));
    let cfg = KickConfig::with_k(k);
    let basis = MomentumBasis::new(128, cfg.hbar, 0.0)?;
    let u = build_period_operator(&cfg, &basis)?;
    let rho0 = initial_density(&cfg, &basis)?;

    let models = [
        DecoherenceModel::None,
        DecoherenceModel::SpontaneousEmission { eta: 0.02 },
        DecoherenceModel::SpontaneousEmission { eta: 0.05 },
        DecoherenceModel::AntiZeno,
    ];
    let curves = models
        .iter()
        .map(|&m| run_decohered(&rho0, &u, m, 70).map(|ev| ev.outside_fraction))
        .collect::<kickrotor::Result<Vec<_>>>()?;
    let classical = propagate_ensemble(&sample_initial(&cfg, 100_000, 1)?, &cfg, 70)?.outside_fraction;

    println!("K = {k}");
    println!("kick,classical,coherent,eta_0.02,eta_0.05,anti_zeno");
    for t in (0..=70).step_by(5) {
        print!("{t},{:.4}", classical[t]);
        for c in &curves {
            print!(",{:.4}", c[t]);
        }
        println!();
    }
    Ok(())
}
