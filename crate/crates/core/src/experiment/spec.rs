use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::decoherence::{DecoherenceModel, RecoilMode, DEFAULT_Q_GRID, DEFAULT_REALIZATIONS};
use crate::error::{Error, Result};
use crate::pulse::KickConfig;

pub const DEFAULT_KICKS: usize = 70;
pub const DEFAULT_TRAJECTORIES: usize = 100_000;
pub const DEFAULT_BASIS_SIZE: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Classical,
    Quantum,
    Floquet,
    Wigner,
    McWavefunction,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Quantum => "quantum",
            Self::Floquet => "floquet",
            Self::Wigner => "wigner",
            Self::McWavefunction => "mc-wavefunction",
            Self::Compare => "compare",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoherenceKind {
    None,
    SpontaneousEmission,
    AntiZeno,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalSettings {
    pub trajectories: usize,
}

impl Default for ClassicalSettings {
    fn default() -> Self {
        Self { trajectories: DEFAULT_TRAJECTORIES }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumSettings {
    pub basis_size: usize,
    pub decoherence: DecoherenceKind,
    /// Emission probability per cycle for `spontaneous-emission`.
    pub eta: f64,
}

impl Default for QuantumSettings {
    fn default() -> Self {
        Self { basis_size: DEFAULT_BASIS_SIZE, decoherence: DecoherenceKind::None, eta: 0.0 }
    }
}

impl QuantumSettings {
    pub fn model(&self) -> DecoherenceModel {
        match self.decoherence {
            DecoherenceKind::None => DecoherenceModel::None,
            DecoherenceKind::SpontaneousEmission => DecoherenceModel::SpontaneousEmission { eta: self.eta },
            DecoherenceKind::AntiZeno => DecoherenceModel::AntiZeno,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSettings {
    pub realizations: usize,
    pub eta: f64,
    pub q_grid: usize,
    pub recoil: RecoilMode,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self { realizations: DEFAULT_REALIZATIONS, eta: 0.05, q_grid: DEFAULT_Q_GRID, recoil: RecoilMode::Continuous }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSettings {
    pub etas: Vec<f64>,
}

impl Default for CompareSettings {
    fn default() -> Self {
        Self { etas: vec![0.02, 0.05] }
    }
}

/// One experiment, as read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mode: Mode,
    #[serde(default = "default_kicks")]
    pub kicks: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub kick: KickConfig,
    #[serde(default)]
    pub classical: ClassicalSettings,
    #[serde(default)]
    pub quantum: QuantumSettings,
    #[serde(default)]
    pub monte_carlo: MonteCarloSettings,
    #[serde(default)]
    pub compare: CompareSettings,
}

fn default_kicks() -> usize {
    DEFAULT_KICKS
}

fn prefixed(section: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter { field: format!("{section}.{field}"), reason },
        other => other,
    }
}

fn check_eta(field: &str, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(crate::error::invalid(field, format!("{eta} is not a probability")));
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn new(mode: Mode, kick: KickConfig) -> Self {
        Self {
            mode,
            kicks: DEFAULT_KICKS,
            seed: 0,
            output_dir: None,
            kick,
            classical: ClassicalSettings::default(),
            quantum: QuantumSettings::default(),
            monte_carlo: MonteCarloSettings::default(),
            compare: CompareSettings::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every precondition the selected pipeline relies on.
    pub fn validate(&self) -> Result<()> {
        use crate::error::invalid;
        self.kick.validate().map_err(|e| prefixed("kick", e))?;
        if self.kicks == 0 && self.mode != Mode::Floquet {
            return Err(invalid("kicks", "must be at least 1"));
        }
        match self.mode {
            Mode::Classical | Mode::Compare if self.classical.trajectories == 0 => {
                return Err(invalid("classical.trajectories", "must be at least 1"));
            }
            _ => {}
        }
        let q = &self.quantum;
        if q.basis_size < 2 || !q.basis_size.is_multiple_of(2) {
            return Err(invalid("quantum.basis_size", format!("must be even and >= 2, got {}", q.basis_size)));
        }
        check_eta("quantum.eta", q.eta)?;
        let mc = &self.monte_carlo;
        if mc.realizations == 0 {
            return Err(invalid("monte_carlo.realizations", "must be at least 1"));
        }
        if mc.q_grid < 2 || !mc.q_grid.is_multiple_of(2) {
            return Err(invalid("monte_carlo.q_grid", format!("must be even and >= 2, got {}", mc.q_grid)));
        }
        check_eta("monte_carlo.eta", mc.eta)?;
        for &eta in &self.compare.etas {
            check_eta("compare.etas", eta)?;
        }
        Ok(())
    }

    /// Short label used for sweep output directories.
    pub fn label(&self) -> String {
        let mut s = format!("{}_K{}", self.mode.name(), self.kick.k);
        match self.mode {
            Mode::Quantum | Mode::Wigner if self.quantum.eta > 0.0 => s.push_str(&format!("_eta{}", self.quantum.eta)),
            Mode::McWavefunction => s.push_str(&format!("_eta{}", self.monte_carlo.eta)),
            _ => {}
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(rename = "K", default)]
    pub k: Vec<f64>,
    /// Applied to `quantum.eta` (and `monte_carlo.eta` in Monte Carlo mode).
    #[serde(default)]
    pub eta: Vec<f64>,
}

/// A list of experiments: explicit `[[runs]]` entries plus the product of `base` with `grid`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepGrid>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<ExperimentSpec>,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn expand(&self) -> Result<Vec<ExperimentSpec>> {
        let mut out = self.runs.clone();
        match (&self.base, &self.grid) {
            (Some(base), Some(grid)) => {
                let ks = if grid.k.is_empty() { vec![base.kick.k] } else { grid.k.clone() };
                let etas: Vec<Option<f64>> =
                    if grid.eta.is_empty() { vec![None] } else { grid.eta.iter().copied().map(Some).collect() };
                for &k in &ks {
                    for &eta in &etas {
                        let mut spec = base.clone();
                        spec.kick.k = k;
                        if let Some(eta) = eta {
                            spec.quantum.eta = eta;
                            spec.monte_carlo.eta = eta;
                            if matches!(spec.mode, Mode::Quantum | Mode::Wigner)
                                && spec.quantum.decoherence == DecoherenceKind::None
                            {
                                spec.quantum.decoherence = DecoherenceKind::SpontaneousEmission;
                            }
                        }
                        out.push(spec);
                    }
                }
            }
            (Some(base), None) => out.push(base.clone()),
            (None, Some(_)) => return Err(crate::error::invalid("grid", "a grid needs a [base] experiment")),
            (None, None) => {}
        }
        if out.is_empty() {
            return Err(crate::error::invalid("runs", "sweep contains no experiments"));
        }
        Ok(out)
    }
}

/// Whether a TOML document describes a sweep rather than a single experiment.
pub fn is_sweep_document(text: &str) -> Result<bool> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    Ok(["base", "grid", "runs"].iter().any(|k| table.contains_key(*k)))
}
