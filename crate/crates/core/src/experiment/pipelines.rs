use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::{csv, grid_csv, OutputDir};
use super::{ExperimentSpec, Mode, SweepReport};
use crate::classical::{propagate_ensemble, sample_initial, HISTOGRAM_BINS};
use crate::decoherence::{mc_wavefunction_run, run_decohered, DecoherenceModel, EmissionModel, McInitial, McOptions};
use crate::diffusion::{fit_flux, MIN_SERIES_LEN};
use crate::error::Result;
use crate::floquet::{decompose, log_scaled};
use crate::quantum::{build_period_operator, initial_density, Evolution, MomentumBasis, PeriodOperator};
use crate::wigner::{strangeness, wigner_transform};

/// Floor applied before taking `log10` of asymptotic probabilities.
const LOG_FLOOR: f64 = 1e-16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct FluxRecord {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "F")]
    pub flux: f64,
    pub a: f64,
    pub window: (usize, usize),
    pub residual: f64,
    pub n_dropped: usize,
    pub n_used: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct StrangenessRecord {
    #[serde(rename = "K")]
    pub k: f64,
    pub eta: f64,
    pub kicks: usize,
    #[serde(rename = "S")]
    pub strangeness: f64,
    pub normalization: f64,
    pub imag_residue: f64,
}

fn basis_for(spec: &ExperimentSpec) -> Result<MomentumBasis> {
    MomentumBasis::new(spec.quantum.basis_size, spec.kick.hbar, 0.0)
}

fn outside_csv(series: &[f64]) -> String {
    csv(
        &["kick", "outside_fraction"],
        series.iter().enumerate().map(|(t, p)| [t.to_string(), p.to_string()]),
    )
}

fn distribution_csv(ev_distributions: &[Vec<f64>], basis: &MomentumBasis) -> String {
    csv(
        &["kick", "n", "probability"],
        ev_distributions.iter().enumerate().flat_map(|(t, d)| {
            d.iter()
                .enumerate()
                .map(move |(i, p)| [t.to_string(), basis.label(i).to_string(), p.to_string()])
        }),
    )
}

/// Runs the pipeline for `spec.mode`; returns the seeds consumed.
pub(crate) fn execute(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<u64>> {
    match spec.mode {
        Mode::Classical => classical(spec, dir),
        Mode::Quantum => quantum(spec, dir),
        Mode::Floquet => floquet(spec, dir),
        Mode::Wigner => wigner(spec, dir),
        Mode::McWavefunction => monte_carlo(spec, dir),
        Mode::Compare => compare(spec, dir),
    }
}

fn classical_series(spec: &ExperimentSpec, dir: Option<&mut OutputDir>) -> Result<Vec<f64>> {
    let ens = sample_initial(&spec.kick, spec.classical.trajectories, spec.seed)?;
    let run = propagate_ensemble(&ens, &spec.kick, spec.kicks)?;
    if let Some(dir) = dir {
        let h = &run.histogram;
        let rows = (0..h.counts.len()).flat_map(|t| {
            (0..HISTOGRAM_BINS).map(move |b| {
                [t.to_string(), h.bin_edges[b].to_string(), h.bin_edges[b + 1].to_string(), h.counts[t][b].to_string()]
            })
        });
        dir.write("momentum_histogram.csv", csv(&["kick", "p_low", "p_high", "count"], rows).as_bytes())?;
        dir.write("outside_fraction.csv", outside_csv(&run.outside_fraction).as_bytes())?;
        dir.write_json(
            "classical_summary.json",
            &serde_json::json!({
                "trajectories": spec.classical.trajectories,
                "outer_crossings": run.outer_crossings,
                "underflow": h.underflow,
                "overflow": h.overflow,
            }),
        )?;
        if run.outside_fraction.len() >= MIN_SERIES_LEN {
            let fit = fit_flux(&run.outside_fraction)?;
            dir.write_json(
                "flux_fit.json",
                &FluxRecord {
                    k: spec.kick.k,
                    flux: fit.flux,
                    a: fit.rate,
                    window: fit.fit_window,
                    residual: fit.residual,
                    n_dropped: fit.n_dropped,
                    n_used: fit.n_used,
                    accepted: fit.accepted,
                },
            )?;
        }
    }
    Ok(run.outside_fraction)
}

fn classical(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<u64>> {
    classical_series(spec, Some(dir))?;
    Ok(vec![spec.seed])
}

fn density_run(spec: &ExperimentSpec, u: &PeriodOperator, model: DecoherenceModel) -> Result<Evolution> {
    let rho0 = initial_density(&spec.kick, u.basis())?;
    run_decohered(&rho0, u, model, spec.kicks)
}

fn quantum(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<u64>> {
    let basis = basis_for(spec)?;
    let u = build_period_operator(&spec.kick, &basis)?;
    let model = spec.quantum.model();
    let ev = density_run(spec, &u, model)?;
    dir.write("outside_fraction.csv", outside_csv(&ev.outside_fraction).as_bytes())?;
    dir.write("momentum_distribution.csv", distribution_csv(&ev.distributions, &basis).as_bytes())?;
    let edge = ev
        .distributions
        .iter()
        .map(|d| d[..8.min(d.len())].iter().chain(&d[d.len().saturating_sub(8)..]).sum::<f64>())
        .fold(0.0, f64::max);
    let trace_defect = ev.traces.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    dir.write_json(
        "operator_diagnostics.json",
        &serde_json::json!({
            "K": spec.kick.k,
            "basis_size": basis.size(),
            "decoherence": model,
            "unitarity_defect": u.unitarity_defect(),
            "parity_defect": u.parity_defect(basis.size() as i64 / 2 - 1),
            "max_edge_population": edge,
            "max_trace_defect": trace_defect,
        }),
    )?;
    Ok(Vec::new())
}

fn floquet(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<u64>> {
    let basis = basis_for(spec)?;
    let u = build_period_operator(&spec.kick, &basis)?;
    let dec = decompose(&u)?;
    dir.write(
        "quasi_energies.csv",
        csv(
            &["j", "quasi_energy"],
            dec.quasi_energies.iter().enumerate().map(|(j, e)| [j.to_string(), e.to_string()]),
        )
        .as_bytes(),
    )?;
    let labels: Vec<f64> = (0..basis.size()).map(|i| basis.label(i) as f64).collect();
    let m = dec.asymptotic_matrix();
    dir.write("asymptotic_matrix.csv", grid_csv("n\\n0", &labels, &labels, &m).as_bytes())?;
    dir.write(
        "asymptotic_matrix_log10.csv",
        grid_csv("n\\n0", &labels, &labels, &log_scaled(&m, LOG_FLOOR)).as_bytes(),
    )?;
    dir.write_json(
        "floquet_diagnostics.json",
        &serde_json::json!({
            "K": spec.kick.k,
            "unitarity_defect": u.unitarity_defect(),
            "reconstruction_error": dec.reconstruction_error(u.matrix()),
            "orthonormality_defect": dec.orthonormality_defect(),
            "degenerate_clusters": dec.degenerate_clusters,
        }),
    )?;
    Ok(Vec::new())
}

fn wigner(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<u64>> {
    let basis = basis_for(spec)?;
    let u = build_period_operator(&spec.kick, &basis)?;
    let model = spec.quantum.model();
    let ev = density_run(spec, &u, model)?;
    let rho = ev.final_state.expect("run records its final state");
    let grid = wigner_transform(&rho, &basis)?;
    dir.write(
        "wigner_coarse.csv",
        grid_csv("p\\phi", &grid.coarse_momenta(), &grid.coarse_positions(), &grid.coarse).as_bytes(),
    )?;
    dir.write(
        "wigner_raw.csv",
        grid_csv("P\\X", &grid.raw_momenta(), &grid.raw_positions(), &grid.raw).as_bytes(),
    )?;
    let eta = match model {
        DecoherenceModel::SpontaneousEmission { eta } => eta,
        _ => 0.0,
    };
    dir.write_json(
        "strangeness.json",
        &StrangenessRecord {
            k: spec.kick.k,
            eta,
            kicks: spec.kicks,
            strangeness: strangeness(&grid),
            normalization: grid.normalization,
            imag_residue: grid.imag_residue,
        },
    )?;
    Ok(Vec::new())
}

fn monte_carlo(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<u64>> {
    let basis = basis_for(spec)?;
    let mc = &spec.monte_carlo;
    let opts = McOptions { realizations: mc.realizations, seed: spec.seed, q_grid: mc.q_grid, initial: McInitial::Gaussian };
    let run = mc_wavefunction_run(
        &spec.kick,
        &basis,
        EmissionModel { eta: mc.eta, recoil_mode: mc.recoil },
        spec.kicks,
        &opts,
    )?;
    dir.write(
        "outside_fraction.csv",
        csv(
            &["kick", "outside_fraction", "stderr", "realizations"],
            run.outside_mean.iter().zip(&run.outside_stderr).enumerate().map(|(t, (m, s))| {
                [t.to_string(), m.to_string(), s.to_string(), run.realizations.to_string()]
            }),
        )
        .as_bytes(),
    )?;
    dir.write("momentum_distribution.csv", distribution_csv(&run.distributions, &basis).as_bytes())?;
    dir.write_json(
        "mc_summary.json",
        &serde_json::json!({
            "K": spec.kick.k,
            "eta": mc.eta,
            "recoil": mc.recoil,
            "realizations": run.realizations,
            "q_grid": run.q_grid,
            "emissions": run.emissions,
            "max_edge_loss": run.max_edge_loss,
        }),
    )?;
    Ok(vec![spec.seed])
}

fn compare(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<u64>> {
    let classical = classical_series(spec, None)?;
    let basis = basis_for(spec)?;
    let u = build_period_operator(&spec.kick, &basis)?;
    let mut header = vec!["kick".to_string(), "classical".to_string(), "coherent".to_string()];
    let mut columns = vec![classical, density_run(spec, &u, DecoherenceModel::None)?.outside_fraction];
    for &eta in &spec.compare.etas {
        header.push(format!("eta_{eta}"));
        columns.push(density_run(spec, &u, DecoherenceModel::SpontaneousEmission { eta })?.outside_fraction);
    }
    header.push("anti_zeno".to_string());
    columns.push(density_run(spec, &u, DecoherenceModel::AntiZeno)?.outside_fraction);
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..=spec.kicks).map(|t| std::iter::once(t.to_string()).chain(columns.iter().map(move |c| c[t].to_string())));
    dir.write("compare.csv", csv(&header_refs, rows).as_bytes())?;
    Ok(vec![spec.seed])
}

pub(crate) fn write_sweep_tables(report: &SweepReport, out: &Path) -> Result<()> {
    let mut flux = Vec::new();
    let mut strange = Vec::new();
    for entry in report.entries.iter().filter(|e| e.manifest.is_some()) {
        let fit_path = entry.output_dir.join("flux_fit.json");
        if fit_path.exists() {
            flux.push(serde_json::from_slice::<FluxRecord>(&std::fs::read(fit_path)?)?);
        }
        let s_path = entry.output_dir.join("strangeness.json");
        if s_path.exists() {
            strange.push(serde_json::from_slice::<StrangenessRecord>(&std::fs::read(s_path)?)?);
        }
    }
    if !flux.is_empty() {
        let rows = flux.iter().map(|r| {
            [
                r.k.to_string(),
                r.flux.to_string(),
                r.a.to_string(),
                r.residual.to_string(),
                r.n_dropped.to_string(),
                r.accepted.to_string(),
            ]
        });
        let text = csv(&["K", "F", "a", "residual", "n_dropped", "accepted"], rows);
        std::fs::write(out.join("flux_vs_K.csv"), text)?;
    }
    if !strange.is_empty() {
        let rows = strange.iter().map(|r| [r.k.to_string(), r.eta.to_string(), r.strangeness.to_string()]);
        std::fs::write(out.join("strangeness.csv"), csv(&["K", "eta", "S"], rows))?;
    }
    let mut summary = serde_json::to_string_pretty(report)?;
    summary.push('\n');
    std::fs::write(out.join("sweep.json"), summary)?;
    Ok(())
}
