use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use kickrotor::experiment::{self, is_sweep_document, ExperimentSpec, SweepSpec};
use kickrotor::Error;

#[derive(Parser)]
#[command(name = "kickrotor", version, about = "Double-kicked rotor experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment.
    Run(RunArgs),
    /// Run every experiment of a sweep file.
    Sweep(SweepArgs),
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output_dir` or `runs/<mode>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "runs/sweep")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn read(path: &Path) -> Result<String, Error> {
    Ok(std::fs::read_to_string(path)?)
}

fn error_report(err: &Error) -> serde_json::Value {
    let kind = match err {
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::NotUnitary { .. } => "not_unitary",
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
        Error::Config(_) => "config",
        Error::Json(_) => "json",
    };
    let mut report = json!({ "status": "error", "kind": kind, "message": err.to_string() });
    if let Error::InvalidParameter { field, .. } = err {
        report["field"] = json!(field);
    }
    report
}

fn load_sweep(text: &str, seed: Option<u64>) -> Result<Vec<ExperimentSpec>, Error> {
    let mut specs = SweepSpec::from_toml(text)?.expand()?;
    for spec in &mut specs {
        if let Some(seed) = seed {
            spec.seed = seed;
        }
        spec.validate()?;
    }
    Ok(specs)
}

fn execute(cli: Cli) -> Result<(serde_json::Value, bool), Error> {
    match cli.command {
        Command::Run(args) => {
            let mut spec = ExperimentSpec::from_toml(&read(&args.config)?)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            let out = args
                .out
                .or_else(|| spec.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("runs").join(spec.mode.name()));
            let manifest = experiment::run(&spec, &out)?;
            Ok((json!({ "status": "ok", "output_dir": out, "manifest": manifest }), true))
        }
        Command::Sweep(args) => {
            let specs = load_sweep(&read(&args.config)?, args.seed)?;
            let report = experiment::sweep(&specs, &args.out, args.workers)?;
            let failures: Vec<_> = report
                .failures()
                .map(|e| json!({ "label": e.label, "error": e.error }))
                .collect();
            let ok = failures.is_empty();
            let status = if ok { "ok" } else { "error" };
            Ok((
                json!({
                    "status": status,
                    "output_dir": args.out,
                    "completed": report.manifests().count(),
                    "failures": failures,
                }),
                ok,
            ))
        }
        Command::Validate { config } => {
            let text = read(&config)?;
            if is_sweep_document(&text)? {
                let specs = load_sweep(&text, None)?;
                Ok((json!({ "status": "ok", "kind": "sweep", "runs": specs.len() }), true))
            } else {
                let spec = ExperimentSpec::from_toml(&text)?;
                Ok((json!({ "status": "ok", "kind": "experiment", "mode": spec.mode }), true))
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok((report, ok)) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("{}", serde_json::to_string_pretty(&error_report(&err)).expect("report serializes"));
            ExitCode::FAILURE
        }
    }
}
