//! Floquet (quasi-energy) analysis of the one-period operator.
//!
//! `U |alpha_j> = exp(-i E_j / hbar) |alpha_j>`. The long-time-averaged
//! momentum distribution from `|n0>` is
//! `P(n | n0) = sum_j |<n0|alpha_j>|^2 |<n|alpha_j>|^2`.

use std::f64::consts::TAU;

use nalgebra::{linalg::Schur, DMatrix};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quantum::{max_abs, DensityMatrix, PeriodOperator};

/// Upstream operators with a larger unitarity defect are rejected.
pub const UNITARITY_GATE: f64 = 1e-6;
/// Eigenphases closer than this (radians) form a degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct FloquetDecomposition {
    /// `E_j = -hbar arg(lambda_j)` reduced to `[0, 2 pi hbar)`.
    pub quasi_energies: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    /// Column `j` is `|alpha_j>` in the momentum basis.
    pub eigenvectors: DMatrix<Complex64>,
    pub hbar: f64,
    /// Groups of eigenvector indices whose eigenphases coincide within [`DEGENERACY_TOL`].
    pub degenerate_clusters: Vec<Vec<usize>>,
}

/// Spectral decomposition of a unitary matrix through its complex Schur form,
/// which is diagonal for normal matrices and keeps the eigenvectors orthonormal
/// even inside near-degenerate clusters.
pub fn decompose_matrix(u: &DMatrix<Complex64>, hbar: f64) -> Result<FloquetDecomposition> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), actual: u.ncols() });
    }
    crate::quantum::require_unitary(u, UNITARITY_GATE)?;
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (vectors, triangular) = schur.unpack();
    let eigenvalues: Vec<Complex64> = (0..n).map(|j| triangular[(j, j)]).collect();
    let quasi_energies = eigenvalues
        .iter()
        .map(|z| (-z.arg()).rem_euclid(TAU) * hbar)
        .map(|e| if e >= TAU * hbar { 0.0 } else { e })
        .collect();
    let degenerate_clusters = degenerate_clusters(&eigenvalues);
    Ok(FloquetDecomposition {
        quasi_energies,
        eigenvalues,
        eigenvectors: vectors,
        hbar,
        degenerate_clusters,
    })
}

pub fn decompose(u: &PeriodOperator) -> Result<FloquetDecomposition> {
    decompose_matrix(u.matrix(), u.basis().hbar())
}

fn degenerate_clusters(eigenvalues: &[Complex64]) -> Vec<Vec<usize>> {
    let mut order: Vec<(f64, usize)> = eigenvalues
        .iter()
        .enumerate()
        .map(|(j, z)| (z.arg().rem_euclid(TAU), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![order[0].1];
    for w in order.windows(2) {
        if w[1].0 - w[0].0 < DEGENERACY_TOL {
            current.push(w[1].1);
        } else {
            if current.len() > 1 {
                clusters.push(std::mem::take(&mut current));
            }
            current = vec![w[1].1];
        }
    }
    // wrap-around between the largest and smallest phase
    if order.len() > 1 && order[0].0 + TAU - order[order.len() - 1].0 < DEGENERACY_TOL {
        if let Some(first) = clusters.first_mut().filter(|c| c.contains(&order[0].1)) {
            first.append(&mut current);
        } else {
            current.push(order[0].1);
        }
    }
    if current.len() > 1 {
        clusters.push(current);
    }
    clusters
}

impl FloquetDecomposition {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_clusters.is_empty()
    }

    /// `max |U - V diag(lambda) V†|`.
    pub fn reconstruction_error(&self, u: &DMatrix<Complex64>) -> f64 {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &lambda) in scaled.column_iter_mut().zip(&self.eigenvalues) {
            col *= lambda;
        }
        let rebuilt = scaled * self.eigenvectors.adjoint();
        max_abs((u - rebuilt).iter().copied())
    }

    /// `max |V†V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let n = self.size();
        max_abs((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
            gram[(i, j)] - if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        }))
    }

    /// `|<n|alpha_j>|^2` as an `N x N` real matrix (rows `n`, columns `j`).
    fn overlap_weights(&self) -> DMatrix<f64> {
        self.eigenvectors.map(|z| z.norm_sqr())
    }

    /// `P(n | n0)` over all `n` for initial momentum index `n0`.
    pub fn asymptotic_distribution(&self, n0: usize) -> Result<Vec<f64>> {
        if n0 >= self.size() {
            return Err(invalid("n0", format!("index {n0} outside basis of size {}", self.size())));
        }
        let w = self.overlap_weights();
        Ok((0..self.size())
            .map(|n| (0..self.size()).map(|j| w[(n0, j)] * w[(n, j)]).sum())
            .collect())
    }

    /// Matrix with entry `(n, n0) = P(n | n0)`.
    pub fn asymptotic_matrix(&self) -> DMatrix<f64> {
        let w = self.overlap_weights();
        &w * w.transpose()
    }

    /// `P(n | rho0) = sum_j <alpha_j|rho0|alpha_j> |<n|alpha_j>|^2`.
    pub fn asymptotic_from_density(&self, rho0: &DensityMatrix) -> Result<Vec<f64>> {
        if rho0.size() != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), actual: rho0.size() });
        }
        let v = &self.eigenvectors;
        let populations = (v.adjoint() * &rho0.elements * v).diagonal();
        let w = self.overlap_weights();
        Ok((0..self.size())
            .map(|n| (0..self.size()).map(|j| populations[j].re * w[(n, j)]).sum())
            .collect())
    }
}

/// `log10` of an asymptotic matrix for pseudo-colour plotting, floored at `floor`.
pub fn log_scaled(matrix: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    matrix.map(|x| x.max(floor).log10())
}
