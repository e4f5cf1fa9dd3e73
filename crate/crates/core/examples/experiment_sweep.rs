//! Drives the experiment layer from a TOML file, the same way the CLI does.
//!
//! Usage: `cargo run --release --example experiment_sweep -- [config.toml] [out_dir]`

use std::path::PathBuf;

use kickrotor::experiment::{self, is_sweep_document, ExperimentSpec, SweepSpec};

fn main() -> kickrotor::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/strangeness_grid.toml").into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/example".into()));
    let text = std::fs::read_to_string(&config)?;

    if is_sweep_document(&text)? {
        let specs = SweepSpec::from_toml(&text)?.expand()?;
        let report = experiment::sweep(&specs, &out, 2)?;
        for entry in &report.entries {
            match &entry.error {
                Some(e) => println!("{}: failed: {e}", entry.label),
                None => println!("{}: ok", entry.label),
            }
        }
    } else {
        let manifest = experiment::run(&ExperimentSpec::from_toml(&text)?, &out)?;
        for o in &manifest.outputs {
            println!("{} {} ({} bytes)", o.sha256, o.file, o.bytes);
        }
    }
    println!("outputs in {}", out.display());
    Ok(())
}
