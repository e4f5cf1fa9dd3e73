//! Strobed phase-space portrait. Writes `phi,p,orbit` rows for plotting.
//!
//! Usage: `cargo run --release --example poincare_section -- [K] [out.csv]`

use std::fmt::Write as _;

use kickrotor::classical::{poincare_section, wrap_angle};
use kickrotor::pulse::{KickConfig, OUTER_BOUNDARY};

fn main() -> kickrotor::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: f64 = args.next().map_or(280.0, |a| a.parse().expect("K must be a number"));
    let out = args.next().unwrap_or_else(|| format!("poincare_K{k}.csv"));

    let (orbits, periods) = (120, 400);
    let cfg = KickConfig::with_k(k);
    let points = poincare_section(&cfg, orbits, periods)?;

    let mut text = String::from("phi,p,orbit\n");
    for (i, s) in points.iter().enumerate() {
        writeln!(text, "{:.6},{:.6},{}", wrap_angle(s.phi), s.p, i / (periods + 1)).unwrap();
    }
    std::fs::write(&out, text)?;

    let beyond = points.iter().filter(|s| s.p.abs() > OUTER_BOUNDARY).count();
    println!("K = {k}: {} points written to {out}", points.len());
    println!("points beyond |p| = 30 pi: {beyond}");
    Ok(())
}
