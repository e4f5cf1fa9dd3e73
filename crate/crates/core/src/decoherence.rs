//! Decoherence by spontaneous emission and by position measurement.
//!
//! Density-matrix maps act once per kick cycle, after the coherent step.
//! The Monte Carlo wavefunction route follows individual pure states that
//! receive a random momentum recoil at a random time inside the pulses.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::trajectory_rng;
use crate::error::{invalid, Error, Result};
use crate::pulse::KickConfig;
use crate::quantum::{build_period_operator, initial_density, DensityMatrix, Evolution, MomentumBasis, PeriodOperator};

pub const DEFAULT_REALIZATIONS: usize = 2000;
pub const DEFAULT_Q_GRID: usize = 64;
/// Realizations summed per parallel work item; fixes the reduction order.
const CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecoherenceModel {
    None,
    SpontaneousEmission { eta: f64 },
    AntiZeno,
}

impl DecoherenceModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SpontaneousEmission { eta } => check_eta(eta),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match *self {
            Self::None => Ok(rho.clone()),
            Self::SpontaneousEmission { eta } => spontaneous_emission_map(rho, eta),
            Self::AntiZeno => Ok(anti_zeno_map(rho)),
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("{eta} is not a probability")));
    }
    Ok(())
}

/// `rho'_{mn} = eta/2 (rho_{m+1,n+1} + rho_{m-1,n-1}) + (1 - eta) rho_{mn}`, indices modulo `N`.
pub fn spontaneous_emission_map(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    let n = rho.size();
    let r = &rho.elements;
    let half = Complex64::new(eta / 2.0, 0.0);
    let keep = Complex64::new(1.0 - eta, 0.0);
    let out = DMatrix::from_fn(n, n, |i, j| {
        let up = r[((i + 1) % n, (j + 1) % n)];
        let down = r[((i + n - 1) % n, (j + n - 1) % n)];
        half * (up + down) + keep * r[(i, j)]
    });
    Ok(DensityMatrix::new(out))
}

/// Keeps the diagonal and zeroes every coherence.
pub fn anti_zeno_map(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_diagonal(&rho.diagonal())
}

/// Coherent conjugation by `U` followed by `model`, once per cycle.
pub fn run_decohered(
    rho0: &DensityMatrix,
    u: &PeriodOperator,
    model: DecoherenceModel,
    kicks: usize,
) -> Result<Evolution> {
    model.validate()?;
    let basis = u.basis();
    if rho0.size() != basis.size() {
        return Err(Error::DimensionMismatch { expected: basis.size(), actual: rho0.size() });
    }
    let mut ev = Evolution::start(rho0, basis, kicks);
    let mut rho = rho0.clone();
    for _ in 0..kicks {
        rho = model.apply(&rho.conjugate(u)?)?;
        ev.record(&rho, basis);
    }
    ev.final_state = Some(rho);
    Ok(ev)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoilMode {
    /// `+-1` ladder step with equal probability.
    Discrete,
    /// `u` uniform on `[-1, 1]` in units of `hbar`.
    Continuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionModel {
    pub eta: f64,
    pub recoil_mode: RecoilMode,
}

impl EmissionModel {
    pub fn continuous(eta: f64) -> Self {
        Self { eta, recoil_mode: RecoilMode::Continuous }
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum McInitial {
    /// Momentum eigenstates drawn from the Gaussian initial distribution.
    Gaussian,
    /// Every realization starts in `|n>`.
    Momentum(i64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub realizations: usize,
    pub seed: u64,
    /// Number of quasi-momentum grid points in `[-1/2, 1/2)`; must be even.
    pub q_grid: usize,
    pub initial: McInitial,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { realizations: DEFAULT_REALIZATIONS, seed: 0, q_grid: DEFAULT_Q_GRID, initial: McInitial::Gaussian }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McRun {
    pub realizations: usize,
    pub q_grid: usize,
    /// Ensemble-averaged momentum distribution after each kick (index 0 = start).
    pub distributions: Vec<Vec<f64>>,
    pub outside_mean: Vec<f64>,
    pub outside_stderr: Vec<f64>,
    pub emissions: u64,
    /// Largest norm lost at the basis edges by a single recoil shift.
    pub max_edge_loss: f64,
}

/// Period operators for every quasi-momentum on the grid, built on demand.
struct OperatorCache<'a> {
    cfg: &'a KickConfig,
    basis: &'a MomentumBasis,
    grid: usize,
    slots: Vec<OnceLock<Result<PeriodOperator>>>,
}

impl<'a> OperatorCache<'a> {
    fn new(cfg: &'a KickConfig, basis: &'a MomentumBasis, grid: usize) -> Self {
        Self { cfg, basis, grid, slots: (0..grid).map(|_| OnceLock::new()).collect() }
    }

    /// Operator for `q = g / grid`, `g in [-grid/2, grid/2)`.
    fn get(&self, g: i64) -> Result<&PeriodOperator> {
        let slot = (g + self.grid as i64 / 2) as usize;
        self.slots[slot]
            .get_or_init(|| {
                let b = self.basis.with_quasi_momentum(g as f64 / self.grid as f64)?;
                build_period_operator(self.cfg, &b)
            })
            .as_ref()
            .map_err(|e| Error::Numerical(format!("operator for q index {g}: {e}")))
    }
}

struct Realization {
    outside: Vec<f64>,
    probs: Vec<Vec<f64>>,
    emissions: u64,
    edge_loss: f64,
}

/// Monte Carlo wavefunction ensemble with random-time recoil.
///
/// Quasi-momentum is tracked in integer units of `1/q_grid`, so a recoil
/// `u` becomes a ladder shift `s` plus a new grid point with `q + u = s + q'`.
pub fn mc_wavefunction_run(
    cfg: &KickConfig,
    basis: &MomentumBasis,
    model: EmissionModel,
    kicks: usize,
    opts: &McOptions,
) -> Result<McRun> {
    cfg.validate()?;
    model.validate()?;
    if opts.realizations == 0 {
        return Err(invalid("realizations", "need at least one realization"));
    }
    if opts.q_grid < 2 || !opts.q_grid.is_multiple_of(2) {
        return Err(invalid("q_grid", "must be an even number >= 2"));
    }
    if basis.quasi_momentum() != 0.0 {
        return Err(invalid("basis", "Monte Carlo runs start from zero quasi-momentum"));
    }
    let start_weights = match opts.initial {
        McInitial::Gaussian => initial_density(cfg, basis)?.diagonal(),
        McInitial::Momentum(n) => {
            let i = basis
                .index(n)
                .ok_or_else(|| invalid("initial", format!("momentum index {n} outside basis")))?;
            let mut w = vec![0.0; basis.size()];
            w[i] = 1.0;
            w
        }
    };
    let cache = OperatorCache::new(cfg, basis, opts.q_grid);
    cache.get(0)?;
    let windows = cfg.profile().windows;
    let on_time = cfg.profile().on_time();

    let chunks: Vec<Result<Accumulator>> = (0..opts.realizations)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut acc = Accumulator::new(kicks, basis.size());
            for &r in idx {
                let one = single_realization(&cache, &start_weights, &windows, on_time, model, kicks, opts, r)?;
                acc.add(&one);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new(kicks, basis.size());
    for chunk in chunks {
        total.merge(&chunk?);
    }
    Ok(total.finish(opts))
}

/// Running sums with a streaming mean and second moment for the outside fraction.
struct Accumulator {
    count: f64,
    probs: Vec<Vec<f64>>,
    outside_mean: Vec<f64>,
    outside_m2: Vec<f64>,
    emissions: u64,
    edge_loss: f64,
}

impl Accumulator {
    fn new(kicks: usize, size: usize) -> Self {
        Self {
            count: 0.0,
            probs: vec![vec![0.0; size]; kicks + 1],
            outside_mean: vec![0.0; kicks + 1],
            outside_m2: vec![0.0; kicks + 1],
            emissions: 0,
            edge_loss: 0.0,
        }
    }

    fn add(&mut self, r: &Realization) {
        self.count += 1.0;
        for (acc, p) in self.probs.iter_mut().zip(&r.probs) {
            acc.iter_mut().zip(p).for_each(|(a, x)| *a += x);
        }
        for (t, &x) in r.outside.iter().enumerate() {
            let d = x - self.outside_mean[t];
            self.outside_mean[t] += d / self.count;
            self.outside_m2[t] += d * (x - self.outside_mean[t]);
        }
        self.emissions += r.emissions;
        self.edge_loss = self.edge_loss.max(r.edge_loss);
    }

    fn merge(&mut self, other: &Self) {
        let total = self.count + other.count;
        if other.count == 0.0 {
            return;
        }
        for (acc, p) in self.probs.iter_mut().zip(&other.probs) {
            acc.iter_mut().zip(p).for_each(|(a, x)| *a += x);
        }
        for t in 0..self.outside_mean.len() {
            let d = other.outside_mean[t] - self.outside_mean[t];
            self.outside_mean[t] += d * other.count / total;
            self.outside_m2[t] += other.outside_m2[t] + d * d * self.count * other.count / total;
        }
        self.count = total;
        self.emissions += other.emissions;
        self.edge_loss = self.edge_loss.max(other.edge_loss);
    }

    fn finish(self, opts: &McOptions) -> McRun {
        let r = self.count;
        let outside_stderr = self
            .outside_m2
            .iter()
            .map(|m2| if r > 1.0 { (m2 / (r - 1.0) / r).sqrt() } else { 0.0 })
            .collect();
        McRun {
            realizations: opts.realizations,
            q_grid: opts.q_grid,
            distributions: self.probs.into_iter().map(|p| p.into_iter().map(|x| x / r).collect()).collect(),
            outside_mean: self.outside_mean,
            outside_stderr,
            emissions: self.emissions,
            max_edge_loss: self.edge_loss,
        }
    }
}

/// Largest per-kick change in the mean outside fraction when the quasi-momentum
/// grid is halved, with all other settings fixed.
pub fn q_grid_halving_change(
    cfg: &KickConfig,
    basis: &MomentumBasis,
    model: EmissionModel,
    kicks: usize,
    opts: &McOptions,
) -> Result<f64> {
    let fine = mc_wavefunction_run(cfg, basis, model, kicks, opts)?;
    let coarse_opts = McOptions { q_grid: opts.q_grid / 2, ..opts.clone() };
    let coarse = mc_wavefunction_run(cfg, basis, model, kicks, &coarse_opts)?;
    Ok(fine
        .outside_mean
        .iter()
        .zip(&coarse.outside_mean)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[allow(clippy::too_many_arguments)]
fn single_realization(
    cache: &OperatorCache<'_>,
    start_weights: &[f64],
    windows: &[(f64, f64)],
    on_time: f64,
    model: EmissionModel,
    kicks: usize,
    opts: &McOptions,
    index: usize,
) -> Result<Realization> {
    let mut rng = trajectory_rng(opts.seed, index as u64);
    let size = start_weights.len();
    let grid = opts.q_grid as i64;
    let start = sample_index(start_weights, rng.random::<f64>());
    let mut psi = DVector::<Complex64>::zeros(size);
    psi[start] = Complex64::new(1.0, 0.0);
    let mut g: i64 = 0;
    let basis0 = cache.basis;
    let mut outside = Vec::with_capacity(kicks + 1);
    let mut probs = Vec::with_capacity(kicks + 1);
    let mut emissions = 0u64;
    let mut edge_loss = 0.0f64;

    let record = |psi: &DVector<Complex64>, g: i64, outside: &mut Vec<f64>, probs: &mut Vec<Vec<f64>>| {
        let q = g as f64 / grid as f64;
        let p: Vec<f64> = psi.iter().map(Complex64::norm_sqr).collect();
        let out = p
            .iter()
            .enumerate()
            .filter(|&(i, _)| ((basis0.label(i) as f64 + q) * basis0.hbar()).abs() > crate::pulse::INNER_BOUNDARY)
            .map(|(_, &x)| x)
            .sum();
        outside.push(out);
        probs.push(p);
    };
    record(&psi, g, &mut outside, &mut probs);

    for _ in 0..kicks {
        let u = cache.get(g)?;
        if model.eta > 0.0 && rng.random::<f64>() < model.eta {
            emissions += 1;
            let tau = emission_time(windows, rng.random::<f64>() * on_time);
            u.propagate_interval(&mut psi, 0.0, tau);
            let (shift, g_new) = match model.recoil_mode {
                RecoilMode::Discrete => (if rng.random::<bool>() { 1 } else { -1 }, g),
                RecoilMode::Continuous => {
                    let recoil = rng.random_range(-1.0..=1.0f64);
                    let total = g + (recoil * grid as f64).round() as i64;
                    let s = (total + grid / 2).div_euclid(grid);
                    (s, total - s * grid)
                }
            };
            edge_loss = edge_loss.max(shift_ladder(&mut psi, shift));
            g = g_new;
            cache.get(g)?.propagate_interval(&mut psi, tau, 1.0);
        } else {
            psi = u.apply(&psi);
        }
        record(&psi, g, &mut outside, &mut probs);
    }
    Ok(Realization { outside, probs, emissions, edge_loss })
}

/// Maps `s in [0, on_time)` onto the pulse windows.
fn emission_time(windows: &[(f64, f64)], mut s: f64) -> f64 {
    for &(a, b) in windows {
        if s < b - a {
            return a + s;
        }
        s -= b - a;
    }
    windows.last().map_or(0.0, |w| w.1)
}

fn sample_index(weights: &[f64], x: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w / total;
        if x < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// `|n> -> |n + shift>`; amplitude pushed past the edges is dropped and the
/// state renormalized. Returns the dropped norm.
fn shift_ladder(psi: &mut DVector<Complex64>, shift: i64) -> f64 {
    let n = psi.len() as i64;
    let mut out = DVector::<Complex64>::zeros(psi.len());
    let mut lost = 0.0;
    for (i, a) in psi.iter().enumerate() {
        let j = i as i64 + shift;
        if (0..n).contains(&j) {
            out[j as usize] = *a;
        } else {
            lost += a.norm_sqr();
        }
    }
    let norm = out.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    *psi = out.unscale(norm);
    lost
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evolve_density, max_abs, QuantumState};
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn basis() -> MomentumBasis {
        MomentumBasis::new(128, 2.6, 0.0).unwrap()
    }

    fn random_density(size: usize, seed: u64) -> DensityMatrix {
        let mut rng = trajectory_rng(seed, 0);
        let a = DMatrix::from_fn(size, size, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let mut m = &a * a.adjoint();
        let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
        m.unscale_mut(tr);
        DensityMatrix::new(m)
    }

    #[test]
    fn emission_from_zero_momentum() {
        let b = basis();
        let zero = b.index(0).unwrap();
        let rho = QuantumState::basis_state(b.size(), zero).to_density();
        let out = spontaneous_emission_map(&rho, 0.05).unwrap();
        let d = out.diagonal();
        assert!((d[zero] - 0.95).abs() < 1e-15);
        assert!((d[zero + 1] - 0.025).abs() < 1e-15);
        assert!((d[zero - 1] - 0.025).abs() < 1e-15);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(out.max_off_diagonal(), 0.0);
    }

    #[test]
    fn emission_wraps_at_the_edges() {
        let rho = DensityMatrix::from_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        let d = spontaneous_emission_map(&rho, 0.5).unwrap().diagonal();
        assert_eq!(d, vec![0.5, 0.25, 0.0, 0.25]);
    }

    #[test]
    fn zero_rate_is_identity() {
        let rho = random_density(16, 3);
        let out = spontaneous_emission_map(&rho, 0.0).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn rate_out_of_range_is_rejected() {
        let rho = random_density(4, 1);
        assert!(spontaneous_emission_map(&rho, 1.5).is_err());
        assert!(spontaneous_emission_map(&rho, -0.1).is_err());
        assert!(EmissionModel::continuous(f64::NAN).validate().is_err());
    }

    #[test]
    fn anti_zeno_keeps_the_diagonal_and_is_idempotent() {
        let rho = random_density(12, 5);
        let once = anti_zeno_map(&rho);
        assert_eq!(once.diagonal(), rho.diagonal());
        assert_eq!(once.max_off_diagonal(), 0.0);
        assert_eq!(anti_zeno_map(&once), once);
        let diag = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]);
        assert_eq!(anti_zeno_map(&diag), diag);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn maps_preserve_trace_and_positivity(seed in 0u64..1000, eta in 0.0f64..=1.0) {
            let rho = random_density(10, seed);
            for out in [spontaneous_emission_map(&rho, eta).unwrap(), anti_zeno_map(&rho)] {
                prop_assert!((out.trace() - 1.0).abs() < 1e-10);
                prop_assert!(out.min_eigenvalue() > -1e-8);
                prop_assert!(out.hermiticity_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn unmapped_run_matches_coherent_evolution() {
        let b = basis();
        let cfg = KickConfig::with_k(180.0);
        let u = build_period_operator(&cfg, &b).unwrap();
        let rho0 = initial_density(&cfg, &b).unwrap();
        let plain = evolve_density(&rho0, &u, 10).unwrap();
        let none = run_decohered(&rho0, &u, DecoherenceModel::None, 10).unwrap();
        let zero = run_decohered(&rho0, &u, DecoherenceModel::SpontaneousEmission { eta: 0.0 }, 10).unwrap();
        assert_eq!(plain.outside_fraction, none.outside_fraction);
        assert_eq!(plain.outside_fraction, zero.outside_fraction);
    }

    #[test]
    fn decohered_runs_preserve_trace() {
        let b = basis();
        let cfg = KickConfig::with_k(280.0);
        let u = build_period_operator(&cfg, &b).unwrap();
        let rho0 = initial_density(&cfg, &b).unwrap();
        for model in [DecoherenceModel::SpontaneousEmission { eta: 0.05 }, DecoherenceModel::AntiZeno] {
            let ev = run_decohered(&rho0, &u, model, 15).unwrap();
            assert!(ev.traces.iter().all(|t| (t - 1.0).abs() < 1e-10));
            assert!(ev.final_state.unwrap().min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn emission_times_cover_the_pulses() {
        let cfg = KickConfig::default();
        let w = cfg.profile().windows;
        assert!((emission_time(&w, 0.0) - 0.0).abs() < 1e-15);
        assert!((emission_time(&w, 0.049) - 0.049).abs() < 1e-15);
        assert!((emission_time(&w, 0.06) - 0.11).abs() < 1e-12);
    }

    #[test]
    fn ladder_shift_moves_and_renormalizes() {
        let mut psi = DVector::from_vec(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
        ]);
        let lost = shift_ladder(&mut psi, -1);
        assert!((lost - 0.36).abs() < 1e-15);
        assert!((psi[0] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let mut psi2 = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(shift_ladder(&mut psi2, 1), 0.0);
        assert_eq!(psi2[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn monte_carlo_without_emission_is_coherent() {
        let b = basis();
        let cfg = KickConfig::with_k(180.0);
        let opts = McOptions { realizations: 8, seed: 7, initial: McInitial::Momentum(3), ..Default::default() };
        let mc = mc_wavefunction_run(&cfg, &b, EmissionModel::continuous(0.0), 12, &opts).unwrap();
        let u = build_period_operator(&cfg, &b).unwrap();
        let rho0 = QuantumState::basis_state(b.size(), b.index(3).unwrap()).to_density();
        let ev = evolve_density(&rho0, &u, 12).unwrap();
        for t in 0..=12 {
            assert!((mc.outside_mean[t] - ev.outside_fraction[t]).abs() < 1e-10);
            assert!(max_abs(mc.distributions[t].iter().zip(&ev.distributions[t]).map(|(a, b)| a - b)) < 1e-10);
            assert!(mc.outside_stderr[t] < 1e-10);
        }
        assert_eq!(mc.emissions, 0);
    }

    #[test]
    fn monte_carlo_is_normalized_and_deterministic() {
        let b = basis();
        let cfg = KickConfig::with_k(280.0);
        let opts = McOptions { realizations: 40, seed: 11, ..Default::default() };
        let a = mc_wavefunction_run(&cfg, &b, EmissionModel::continuous(0.3), 10, &opts).unwrap();
        let c = mc_wavefunction_run(&cfg, &b, EmissionModel::continuous(0.3), 10, &opts).unwrap();
        assert_eq!(a.outside_mean, c.outside_mean);
        assert!(a.emissions > 0);
        for d in &a.distributions {
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        assert!(a.max_edge_loss < 1e-8);
    }

    #[test]
    fn monte_carlo_rejects_bad_options() {
        let b = basis();
        let cfg = KickConfig::default();
        let m = EmissionModel::continuous(0.05);
        let bad = [
            McOptions { realizations: 0, ..Default::default() },
            McOptions { q_grid: 7, ..Default::default() },
            McOptions { initial: McInitial::Momentum(500), ..Default::default() },
        ];
        for opts in &bad {
            assert!(mc_wavefunction_run(&cfg, &b, m, 3, opts).is_err());
        }
    }
}
