//! Batch experiments: TOML specs in, CSV/JSON datasets plus a checksummed
//! manifest out.

mod output;
mod pipelines;
mod spec;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use output::OutputRecord;
pub use spec::{
    is_sweep_document, ClassicalSettings, CompareSettings, DecoherenceKind, ExperimentSpec, Mode, MonteCarloSettings,
    QuantumSettings, SweepGrid, SweepSpec, DEFAULT_BASIS_SIZE, DEFAULT_KICKS, DEFAULT_TRAJECTORIES,
};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: ExperimentSpec,
    pub code_version: String,
    pub wall_time_s: f64,
    pub seeds: Vec<u64>,
    pub outputs: Vec<OutputRecord>,
}

/// Runs `spec`, writing every dataset plus `manifest.json` into `out`.
/// On failure the files written so far are removed.
pub fn run(spec: &ExperimentSpec, out: &Path) -> Result<RunManifest> {
    spec.validate()?;
    let start = Instant::now();
    let mut dir = output::OutputDir::create(out)?;
    let result = pipelines::execute(spec, &mut dir).and_then(|seeds| {
        let manifest = RunManifest {
            spec: spec.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
            seeds,
            outputs: dir.records().to_vec(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(dir.root().join(MANIFEST_FILE), text)?;
        Ok(manifest)
    });
    if result.is_err() {
        dir.discard();
    }
    result
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub label: String,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = &SweepEntry> {
        self.entries.iter().filter(|e| e.error.is_some())
    }

    pub fn manifests(&self) -> impl Iterator<Item = &RunManifest> {
        self.entries.iter().filter_map(|e| e.manifest.as_ref())
    }
}

/// Runs each spec into its own subdirectory of `out`, at most `workers` at a
/// time. A failing spec is reported without stopping the others. Aggregate
/// tables (`flux_vs_K.csv`, `strangeness.csv`) are written when the sweep
/// contains classical or Wigner runs.
pub fn sweep(specs: &[ExperimentSpec], out: &Path, workers: usize) -> Result<SweepReport> {
    if specs.is_empty() {
        return Err(invalid("runs", "sweep contains no experiments"));
    }
    if workers == 0 {
        return Err(invalid("workers", "must be at least 1"));
    }
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let entries: Vec<SweepEntry> = pool.install(|| {
        specs
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let label = format!("{i:03}_{}", spec.label());
                let dir = out.join(&label);
                match run(spec, &dir) {
                    Ok(m) => SweepEntry { label, output_dir: dir, manifest: Some(m), error: None },
                    Err(e) => SweepEntry { label, output_dir: dir, manifest: None, error: Some(e.to_string()) },
                }
            })
            .collect()
    });
    let report = SweepReport { entries };
    pipelines::write_sweep_tables(&report, out)?;
    Ok(report)
}
