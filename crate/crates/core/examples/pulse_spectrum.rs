//! Fourier content of the double pulse train and a partial-sum reconstruction.

use kickrotor::pulse::{pulse_value, reconstruct_profile, KickConfig};

fn main() {
    let cfg = KickConfig::with_k(280.0);
    println!("m,a_m");
    for m in 0..=20 {
        println!("{m},{:.6e}", cfg.fourier_coefficient(m));
    }

    // Gibbs ringing shrinks in width as more harmonics are kept.
    println!();
    println!("t,f(t),sum_10,sum_40,sum_160");
    for i in 0..=60 {
        let t = i as f64 / 200.0;
        println!(
            "{t:.3},{},{:.4},{:.4},{:.4}",
            pulse_value(&cfg, t),
            reconstruct_profile(&cfg, t, 10),
            reconstruct_profile(&cfg, t, 40),
            reconstruct_profile(&cfg, t, 160)
        );
    }
}
