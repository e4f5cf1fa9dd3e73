use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{max_abs, MomentumBasis, PeriodOperator};
use crate::error::{invalid, Error, Result};
use crate::pulse::KickConfig;

/// A pure state over a [`MomentumBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    pub amplitudes: DVector<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// The momentum eigenstate at array index `i`.
    pub fn basis_state(size: usize, i: usize) -> Self {
        let mut amplitudes = DVector::zeros(size);
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amplitudes.unscale_mut(norm);
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::new(&self.amplitudes * self.amplitudes.adjoint())
    }
}

/// A density matrix `<m|rho|n>` in the momentum basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub elements: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(elements: DMatrix<Complex64>) -> Self {
        Self { elements }
    }

    pub fn from_diagonal(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut elements = DMatrix::zeros(n, n);
        for (i, &w) in weights.iter().enumerate() {
            elements[(i, i)] = Complex64::new(w, 0.0);
        }
        Self { elements }
    }

    pub fn size(&self) -> usize {
        self.elements.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.elements.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.elements.diagonal().iter().map(|z| z.re).collect()
    }

    /// `max |rho - rho†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs((&self.elements - self.elements.adjoint()).iter().copied())
    }

    /// Smallest eigenvalue of the Hermitian part (positivity audit).
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.size();
        max_abs((0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|ij| self.elements[ij]))
    }

    /// `U rho U†`.
    pub fn conjugate(&self, u: &PeriodOperator) -> Result<Self> {
        if u.matrix().nrows() != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), actual: u.matrix().nrows() });
        }
        Ok(Self { elements: u.matrix() * &self.elements * u.adjoint() })
    }
}

/// Diagonal Gaussian `exp(-p_n^2 / (2 sigma_p^2)) / A` with `p_n = (n + q) hbar`.
pub fn initial_density(cfg: &KickConfig, basis: &MomentumBasis) -> Result<DensityMatrix> {
    if cfg.sigma_p.is_nan() || cfg.sigma_p <= 0.0 {
        return Err(invalid("sigma_p", "must be positive"));
    }
    let mut weights: Vec<f64> = (0..basis.size())
        .map(|i| {
            let p = basis.momentum(i);
            (-p * p / (2.0 * cfg.sigma_p * cfg.sigma_p)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(DensityMatrix::from_diagonal(&weights))
}

/// Momentum probabilities and the weight strictly beyond `|p| = 10 pi`.
pub fn momentum_distribution(rho: &DensityMatrix, basis: &MomentumBasis) -> (Vec<f64>, f64) {
    let probs = rho.diagonal();
    let outside = outside_weight(&probs, basis);
    (probs, outside)
}

pub(crate) fn outside_weight(probs: &[f64], basis: &MomentumBasis) -> f64 {
    probs
        .iter()
        .enumerate()
        .filter(|&(i, _)| basis.is_outside(i))
        .map(|(_, &p)| p)
        .sum()
}

/// Per-kick record of a density-matrix run; index `t` is after `t` periods.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evolution {
    pub distributions: Vec<Vec<f64>>,
    pub outside_fraction: Vec<f64>,
    pub traces: Vec<f64>,
    #[serde(skip)]
    pub final_state: Option<DensityMatrix>,
}

impl Evolution {
    pub(crate) fn start(rho: &DensityMatrix, basis: &MomentumBasis, kicks: usize) -> Self {
        let mut ev = Self {
            distributions: Vec::with_capacity(kicks + 1),
            outside_fraction: Vec::with_capacity(kicks + 1),
            traces: Vec::with_capacity(kicks + 1),
            final_state: None,
        };
        ev.record(rho, basis);
        ev
    }

    pub(crate) fn record(&mut self, rho: &DensityMatrix, basis: &MomentumBasis) {
        let (probs, outside) = momentum_distribution(rho, basis);
        self.traces.push(rho.trace());
        self.distributions.push(probs);
        self.outside_fraction.push(outside);
    }
}

/// `rho_t = U rho_{t-1} U†` for `kicks` periods.
pub fn evolve_density(rho0: &DensityMatrix, u: &PeriodOperator, kicks: usize) -> Result<Evolution> {
    let basis = u.basis();
    if rho0.size() != basis.size() {
        return Err(Error::DimensionMismatch { expected: basis.size(), actual: rho0.size() });
    }
    let mut ev = Evolution::start(rho0, basis, kicks);
    let mut rho = rho0.clone();
    for _ in 0..kicks {
        rho = rho.conjugate(u)?;
        ev.record(&rho, basis);
    }
    ev.final_state = Some(rho);
    Ok(ev)
}
