//! Quasi-energies of the period operator and the infinite-time momentum
//! distribution from a few starting states.

use kickrotor::floquet::decompose;
use kickrotor::pulse::KickConfig;
use kickrotor::quantum::{build_period_operator, MomentumBasis};

fn main() -> kickrotor::Result<()> {
    let k = std::env::args().nth(1).map_or(180.0, |a| a.parse().expect("K must be a number"));
    let cfg = KickConfig::with_k(k);
    let basis = MomentumBasis::new(128, cfg.hbar, 0.0)?;
    let u = build_period_operator(&cfg, &basis)?;
    let dec = decompose(&u)?;

    let mut energies = dec.quasi_energies.clone();
    energies.sort_by(f64::total_cmp);
    let spacing = energies.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    println!("K = {k}: {} quasi-energies in [0, {:.3})", energies.len(), 2.0 * std::f64::consts::PI * cfg.hbar);
    println!("smallest spacing {spacing:.2e}, degenerate clusters {}", dec.degenerate_clusters.len());
    println!(
        "reconstruction error {:.1e}, orthonormality defect {:.1e}",
        dec.reconstruction_error(u.matrix()),
        dec.orthonormality_defect()
    );

    println!("n0,P(n0|n0),P(-n0|n0),P(|n| > 12|n0)");
    for n0 in [0, 6, 12, 20, 36] {
        let p = dec.asymptotic_distribution(basis.index(n0).unwrap())?;
        let mirror = p[basis.index(-n0).unwrap()];
        let outside: f64 = (0..basis.size()).filter(|&i| basis.label(i).abs() > 12).map(|i| p[i]).sum();
        println!("{n0},{:.4},{mirror:.4},{outside:.4}", p[basis.index(n0).unwrap()]);
    }
    Ok(())
}
