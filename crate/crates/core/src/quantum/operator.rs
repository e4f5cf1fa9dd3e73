use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{max_abs, MomentumBasis};
use crate::error::{Error, Result};
use crate::pulse::{KickConfig, Segment};

/// Exact propagator for the time-independent pulse Hamiltonian
/// `H = p^2/2 - K cos(phi)`, stored as its eigendecomposition.
///
/// The truncation is a hard wall: `cos(phi)` couples `n` to `n ± 1` only
/// inside the basis.
#[derive(Clone, Debug)]
pub struct PulsePropagator {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
    hbar: f64,
}

impl PulsePropagator {
    pub fn new(basis: &MomentumBasis, k: f64) -> Self {
        let n = basis.size();
        let mut h = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let p = basis.momentum(i);
            h[(i, i)] = 0.5 * p * p;
            if i + 1 < n {
                h[(i, i + 1)] = -0.5 * k;
                h[(i + 1, i)] = -0.5 * k;
            }
        }
        let eig = SymmetricEigen::new(h);
        Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
            hbar: basis.hbar(),
        }
    }

    fn phases(&self, w: f64) -> impl Iterator<Item = Complex64> + '_ {
        self.energies
            .iter()
            .map(move |&e| Complex64::from_polar(1.0, -e * w / self.hbar))
    }

    /// `exp(-i H w / hbar)` as a dense matrix.
    pub fn matrix(&self, w: f64) -> DMatrix<Complex64> {
        let v = self.vectors.map(|x| Complex64::new(x, 0.0));
        let mut scaled = v.clone();
        for (mut col, ph) in scaled.column_iter_mut().zip(self.phases(w)) {
            col *= ph;
        }
        scaled * v.transpose()
    }

    /// Applies `exp(-i H w / hbar)` to `psi` in place.
    pub fn apply(&self, psi: &mut DVector<Complex64>, w: f64) {
        let n = psi.len();
        let mut coeffs: Vec<Complex64> = (0..n)
            .map(|j| {
                self.vectors
                    .column(j)
                    .iter()
                    .zip(psi.iter())
                    .map(|(&v, &a)| a * v)
                    .sum::<Complex64>()
            })
            .collect();
        for (c, ph) in coeffs.iter_mut().zip(self.phases(w)) {
            *c *= ph;
        }
        for i in 0..n {
            psi[i] = self
                .vectors
                .row(i)
                .iter()
                .zip(&coeffs)
                .map(|(&v, &c)| c * v)
                .sum();
        }
    }
}

/// Diagonal free-rotation phases `exp(-i (n+q)^2 hbar w / 2)`.
pub(crate) fn free_phases(basis: &MomentumBasis, w: f64) -> Vec<Complex64> {
    (0..basis.size())
        .map(|i| {
            let x = basis.label(i) as f64 + basis.quasi_momentum();
            Complex64::from_polar(1.0, -0.5 * x * x * basis.hbar() * w)
        })
        .collect()
}

/// The one-period evolution operator together with the pieces it was built from.
#[derive(Clone, Debug)]
pub struct PeriodOperator {
    matrix: DMatrix<Complex64>,
    adjoint: DMatrix<Complex64>,
    basis: MomentumBasis,
    cfg: KickConfig,
    pulse: PulsePropagator,
}

/// `U = F(1 - Delta - alpha/2) P(alpha/2) F(Delta - alpha/2) P(alpha/2)`.
pub fn build_period_operator(cfg: &KickConfig, basis: &MomentumBasis) -> Result<PeriodOperator> {
    cfg.validate()?;
    if (cfg.hbar - basis.hbar()).abs() > 1e-15 * cfg.hbar {
        return Err(crate::error::invalid(
            "hbar",
            format!("basis uses {} but config uses {}", basis.hbar(), cfg.hbar),
        ));
    }
    let pulse = PulsePropagator::new(basis, cfg.k);
    let n = basis.size();
    let mut u = DMatrix::<Complex64>::identity(n, n);
    let pulse_matrix = pulse.matrix(cfg.pulse_width());
    for seg in cfg.segments() {
        match seg {
            Segment::Pulse(_) => u = &pulse_matrix * u,
            Segment::Free(w) => {
                for (i, ph) in free_phases(basis, w).into_iter().enumerate() {
                    let mut row = u.row_mut(i);
                    row *= ph;
                }
            }
        }
    }
    let adjoint = u.adjoint();
    Ok(PeriodOperator { matrix: u, adjoint, basis: *basis, cfg: *cfg, pulse })
}

impl PeriodOperator {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> &DMatrix<Complex64> {
        &self.adjoint
    }

    pub fn basis(&self) -> &MomentumBasis {
        &self.basis
    }

    pub fn config(&self) -> &KickConfig {
        &self.cfg
    }

    pub fn pulse(&self) -> &PulsePropagator {
        &self.pulse
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    pub fn apply(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * psi
    }

    /// Evolves `psi` from time `t0` to `t1` within one period (`0 <= t0 <= t1 <= 1`),
    /// splitting segments where needed.
    pub fn propagate_interval(&self, psi: &mut DVector<Complex64>, t0: f64, t1: f64) {
        debug_assert!(0.0 <= t0 && t0 <= t1 && t1 <= 1.0 + 1e-12);
        let mut start = 0.0;
        for seg in self.cfg.segments() {
            let (len, is_pulse) = match seg {
                Segment::Pulse(w) => (w, true),
                Segment::Free(w) => (w, false),
            };
            let end = start + len;
            let lo = start.max(t0);
            let hi = end.min(t1);
            if hi > lo {
                let w = hi - lo;
                if is_pulse {
                    self.pulse.apply(psi, w);
                } else {
                    for (a, ph) in psi.iter_mut().zip(free_phases(&self.basis, w)) {
                        *a *= ph;
                    }
                }
            }
            start = end;
        }
    }

    /// Max-norm of `[U, Pi]` restricted to labels `|n| <= n_cut`, with `Pi: n -> -n`.
    pub fn parity_defect(&self, n_cut: i64) -> f64 {
        let b = &self.basis;
        let mut worst = 0.0f64;
        for m in -n_cut..=n_cut {
            for n in -n_cut..=n_cut {
                let (Some(i), Some(j), Some(ri), Some(rj)) = (b.index(m), b.index(n), b.index(-m), b.index(-n))
                else {
                    continue;
                };
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(ri, rj)]).norm());
            }
        }
        worst
    }
}

pub(crate) fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    max_abs((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
        prod[(i, j)] - if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
    }))
}

pub(crate) fn require_unitary(u: &DMatrix<Complex64>, tol: f64) -> Result<f64> {
    let defect = unitarity_defect(u);
    if defect > tol {
        Err(Error::NotUnitary { defect })
    } else {
        Ok(defect)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> MomentumBasis {
        MomentumBasis::new(128, 2.6, 0.0).unwrap()
    }

    #[test]
    fn free_period_is_diagonal_phase() {
        let b = basis();
        let u = build_period_operator(&KickConfig::with_k(0.0), &b).unwrap();
        for i in 0..b.size() {
            for j in 0..b.size() {
                let expected = if i == j {
                    let n = b.label(i) as f64;
                    Complex64::from_polar(1.0, -n * n * 2.6 / 2.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((u.matrix()[(i, j)] - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn unitary_at_strong_kicking() {
        for k in [80.0, 280.0, 400.0] {
            let u = build_period_operator(&KickConfig::with_k(k), &basis()).unwrap();
            assert!(u.unitarity_defect() < 1e-10, "K = {k}: {}", u.unitarity_defect());
        }
    }

    #[test]
    fn commutes_with_parity_away_from_edges() {
        let u = build_period_operator(&KickConfig::with_k(280.0), &basis()).unwrap();
        assert!(u.parity_defect(40) < 1e-8, "{}", u.parity_defect(40));
    }

    #[test]
    fn interval_propagation_composes_to_full_period() {
        let b = basis();
        let u = build_period_operator(&KickConfig::with_k(180.0), &b).unwrap();
        let mut psi = DVector::<Complex64>::zeros(b.size());
        psi[b.index(3).unwrap()] = Complex64::new(0.6, 0.0);
        psi[b.index(-2).unwrap()] = Complex64::new(0.0, 0.8);
        let expected = u.apply(&psi);
        let mut stepped = psi.clone();
        for (t0, t1) in [(0.0, 0.013), (0.013, 0.07), (0.07, 0.12), (0.12, 0.5), (0.5, 1.0)] {
            u.propagate_interval(&mut stepped, t0, t1);
        }
        assert!(max_abs((&stepped - &expected).iter().copied()) < 1e-12);
    }

    #[test]
    fn pulse_apply_matches_matrix() {
        let b = basis();
        let p = PulsePropagator::new(&b, 280.0);
        let mut psi = DVector::<Complex64>::from_fn(b.size(), |i, _| {
            Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()) / 8.0
        });
        let expected = p.matrix(0.021) * &psi;
        p.apply(&mut psi, 0.021);
        assert!(max_abs((&psi - &expected).iter().copied()) < 1e-12);
    }
}
