//! Discrete Wigner functions and the strangeness measure.

use kickrotor::decoherence::{run_decohered, DecoherenceModel};
use kickrotor::pulse::KickConfig;
use kickrotor::quantum::{build_period_operator, initial_density, MomentumBasis};
use kickrotor::wigner::{strangeness, strangeness_sweep, two_packet_strangeness, wigner_transform};

fn main() -> kickrotor::Result<()> {
    let basis = MomentumBasis::new(128, 2.6, 0.0)?;

    println!("two packets at n = +-16");
    println!("width,S_mixed,S_superposition");
    for width in [1.0, 2.0, 4.0] {
        let (mixed, sup) = two_packet_strangeness(&basis, 16.0, width)?;
        println!("{width},{mixed:.4},{sup:.4}");
    }

    let cfg = KickConfig::with_k(280.0);
    let u = build_period_operator(&cfg, &basis)?;
    let ev = run_decohered(&initial_density(&cfg, &basis)?, &u, DecoherenceModel::None, 20)?;
    let grid = wigner_transform(ev.final_state.as_ref().expect("final state recorded"), &basis)?;
    let negative = grid.coarse.iter().filter(|&&w| w < 0.0).count();
    println!();
    println!(
        "K = 280 after 20 kicks: S = {:.4}, {negative} of {} coarse cells negative",
        strangeness(&grid),
        grid.coarse.len()
    );

    println!();
    println!("K,eta,S");
    for row in strangeness_sweep(&cfg, &basis, &[80.0, 180.0, 280.0], &[0.0, 0.02, 0.05], 20)? {
        println!("{},{},{:.4}", row.k, row.eta, row.strangeness);
    }
    Ok(())
}
