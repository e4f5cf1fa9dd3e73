//! Discrete toroidal Wigner function and the strangeness statistic.
//!
//! For a density matrix on `N` momentum states the raw function lives on a
//! `2N x 2N` grid with `X_k = pi k / N` and `P_l = (hbar / 2) l`:
//!
//! `w(k, l) = sum_j exp(i pi j k / N) [l + j even] <(l + j)/2| rho |(l - j)/2>`
//!
//! with momentum labels reduced modulo `N`. Averaging `2 x 2` cells gives an
//! `N x N` grid whose row marginals are the momentum probabilities.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::decoherence::{run_decohered, DecoherenceModel};
use crate::error::{invalid, Error, Result};
use crate::pulse::KickConfig;
use crate::quantum::{build_period_operator, initial_density, DensityMatrix, MomentumBasis, QuantumState};

#[derive(Clone, Debug)]
pub struct WignerGrid {
    /// Rows indexed by `l` (momentum), columns by `k` (position); `2N x 2N`.
    pub raw: DMatrix<f64>,
    /// `N x N` cell averages scaled to unit sum; row `a` is momentum label `n_min + a`.
    pub coarse: DMatrix<f64>,
    /// Factor applied to the cell averages.
    pub normalization: f64,
    /// Largest imaginary part discarded when realizing the raw grid.
    pub imag_residue: f64,
    pub hbar: f64,
    pub n_min: i64,
}

impl WignerGrid {
    pub fn size(&self) -> usize {
        self.coarse.nrows()
    }

    /// `X_k` for the raw columns.
    pub fn raw_positions(&self) -> Vec<f64> {
        let n = self.size() as f64;
        (0..2 * self.size()).map(|k| PI * k as f64 / n).collect()
    }

    /// `P_l` for the raw rows.
    pub fn raw_momenta(&self) -> Vec<f64> {
        (0..2 * self.size())
            .map(|l| 0.5 * self.hbar * (l as i64 + 2 * self.n_min) as f64)
            .collect()
    }

    /// Cell-centre positions of the coarse columns.
    pub fn coarse_positions(&self) -> Vec<f64> {
        let n = self.size() as f64;
        (0..self.size()).map(|b| PI * (2 * b) as f64 / n + PI / (2.0 * n)).collect()
    }

    /// Momentum `n hbar` of each coarse row.
    pub fn coarse_momenta(&self) -> Vec<f64> {
        (0..self.size()).map(|a| self.hbar * (self.n_min + a as i64) as f64).collect()
    }

    /// Sum over position of each coarse row.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        self.coarse.row_iter().map(|r| r.sum()).collect()
    }
}

/// Builds the raw and coarse Wigner grids of `rho`.
pub fn wigner_transform(rho: &DensityMatrix, basis: &MomentumBasis) -> Result<WignerGrid> {
    let n = rho.size();
    if n != basis.size() {
        return Err(Error::DimensionMismatch { expected: basis.size(), actual: n });
    }
    let m = 2 * n;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let n_min = basis.n_min();
    let wrap = |label: i64| (label - n_min).rem_euclid(n as i64) as usize;

    let rows: Vec<(Vec<f64>, f64)> = (0..m)
        .into_par_iter()
        .map(|l| {
            let total = l as i64 + 2 * n_min;
            let mut line: Vec<Complex64> = (0..m as i64)
                .map(|j| {
                    if (total + j).rem_euclid(2) != 0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    rho.elements[(wrap((total + j).div_euclid(2)), wrap((total - j).div_euclid(2)))]
                })
                .collect();
            fft.process(&mut line);
            let residue = line.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            (line.into_iter().map(|z| z.re).collect(), residue)
        })
        .collect();

    let imag_residue = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let raw = DMatrix::from_fn(m, m, |l, k| rows[l].0[k]);
    let mut coarse = DMatrix::from_fn(n, n, |a, b| {
        0.25 * (raw[(2 * a, 2 * b)] + raw[(2 * a, 2 * b + 1)] + raw[(2 * a + 1, 2 * b)] + raw[(2 * a + 1, 2 * b + 1)])
    });
    let sum = coarse.sum();
    if sum.is_nan() || sum.abs() <= f64::MIN_POSITIVE {
        return Err(Error::Numerical("Wigner grid has zero total weight".into()));
    }
    let normalization = 1.0 / sum;
    coarse *= normalization;
    Ok(WignerGrid { raw, coarse, normalization, imag_residue, hbar: basis.hbar(), n_min })
}

/// `S = sum (|W| - W)` over the coarse grid: twice its negative mass.
pub fn strangeness(grid: &WignerGrid) -> f64 {
    grid.coarse.iter().map(|&w| w.abs() - w).sum()
}

/// Pure state with Gaussian momentum probabilities of width `sigma_n` (in ladder
/// units) around label `center`, centred at `phi = 0`.
pub fn gaussian_packet(basis: &MomentumBasis, center: f64, sigma_n: f64) -> Result<QuantumState> {
    if sigma_n.is_nan() || sigma_n <= 0.0 {
        return Err(invalid("sigma_n", "must be positive"));
    }
    let amps = (0..basis.size())
        .map(|i| {
            let d = basis.label(i) as f64 - center;
            Complex64::new((-d * d / (4.0 * sigma_n * sigma_n)).exp(), 0.0)
        })
        .collect::<Vec<_>>();
    let mut state = QuantumState::new(amps.into());
    state.normalize();
    Ok(state)
}

/// Equal mixture and in-phase superposition of packets at `+-offset`.
pub fn two_packet_states(basis: &MomentumBasis, offset: f64, sigma_n: f64) -> Result<(DensityMatrix, DensityMatrix)> {
    let up = gaussian_packet(basis, offset, sigma_n)?;
    let down = gaussian_packet(basis, -offset, sigma_n)?;
    let half = Complex64::new(0.5, 0.0);
    let mixed = DensityMatrix::new((up.to_density().elements + down.to_density().elements) * half);
    let mut sup = QuantumState::new(&up.amplitudes + &down.amplitudes);
    sup.normalize();
    Ok((mixed, sup.to_density()))
}

/// Strangeness of the two-packet mixture and superposition.
pub fn two_packet_strangeness(basis: &MomentumBasis, offset: f64, sigma_n: f64) -> Result<(f64, f64)> {
    let (mixed, sup) = two_packet_states(basis, offset, sigma_n)?;
    Ok((
        strangeness(&wigner_transform(&mixed, basis)?),
        strangeness(&wigner_transform(&sup, basis)?),
    ))
}

/// Packet width in `[lo, hi]` at which the two-packet mixture has strangeness
/// `target`, by bisection. The mixture's strangeness falls with width.
pub fn calibrate_packet_width(basis: &MomentumBasis, offset: f64, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let s = |w: f64| two_packet_strangeness(basis, offset, w).map(|p| p.0 - target);
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (s(a)?, s(b)?);
    if fa.signum() == fb.signum() {
        return Err(invalid("width bracket", format!("strangeness does not cross {target} on [{lo}, {hi}]")));
    }
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if s(mid)?.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrangenessRow {
    #[serde(rename = "K")]
    pub k: f64,
    pub eta: f64,
    pub strangeness: f64,
}

/// Strangeness of the state after `kicks` cycles from the Gaussian initial
/// state, for each `(K, eta)` pair.
pub fn strangeness_sweep(
    base: &KickConfig,
    basis: &MomentumBasis,
    k_values: &[f64],
    etas: &[f64],
    kicks: usize,
) -> Result<Vec<StrangenessRow>> {
    let jobs: Vec<(f64, f64)> = k_values.iter().flat_map(|&k| etas.iter().map(move |&e| (k, e))).collect();
    jobs.into_par_iter()
        .map(|(k, eta)| {
            let cfg = KickConfig { k, ..*base };
            let u = build_period_operator(&cfg, basis)?;
            let rho0 = initial_density(&cfg, basis)?;
            let ev = run_decohered(&rho0, &u, DecoherenceModel::SpontaneousEmission { eta }, kicks)?;
            let rho = ev.final_state.expect("run records its final state");
            Ok(StrangenessRow { k, eta, strangeness: strangeness(&wigner_transform(&rho, basis)?) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::trajectory_rng;
    use crate::decoherence::anti_zeno_map;
    use crate::quantum::max_abs;
    use rand::Rng;

    fn basis(n: usize) -> MomentumBasis {
        MomentumBasis::new(n, 2.6, 0.0).unwrap()
    }

    fn random_density(size: usize, seed: u64) -> DensityMatrix {
        let mut rng = trajectory_rng(seed, 1);
        let a = DMatrix::from_fn(size, size, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut m = &a * a.adjoint();
        let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
        m.unscale_mut(tr);
        DensityMatrix::new(m)
    }

    /// Direct evaluation of the defining sum, one `(k, l)` at a time.
    fn brute_force(rho: &DensityMatrix, n_min: i64) -> DMatrix<f64> {
        let n = rho.size() as i64;
        let m = 2 * n;
        DMatrix::from_fn(m as usize, m as usize, |l, k| {
            let total = l as i64 + 2 * n_min;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if (total + j) % 2 != 0 {
                    continue;
                }
                let a = ((total + j) / 2 - n_min).rem_euclid(n) as usize;
                let b = ((total - j).div_euclid(2) - n_min).rem_euclid(n) as usize;
                s += Complex64::from_polar(1.0, PI * (j * k as i64) as f64 / n as f64) * rho.elements[(a, b)];
            }
            s.re
        })
    }

    #[test]
    fn fft_matches_direct_sum() {
        let b = basis(16);
        let rho = random_density(16, 4);
        let g = wigner_transform(&rho, &b).unwrap();
        let direct = brute_force(&rho, b.n_min());
        assert!(max_abs((&g.raw - direct).iter().copied()) < 1e-12);
    }

    #[test]
    fn grid_is_real_normalized_with_exact_marginal() {
        let b = basis(32);
        let rho = random_density(32, 9);
        let g = wigner_transform(&rho, &b).unwrap();
        assert!(g.imag_residue < 1e-10);
        assert!((g.coarse.sum() - 1.0).abs() < 1e-10);
        for (m, d) in g.momentum_marginal().iter().zip(rho.diagonal()) {
            assert!((m - d).abs() < 1e-8);
        }
        assert!((g.normalization - 2.0 / 32.0).abs() < 1e-12);
        assert!(g.coarse.iter().map(|w| w.abs()).sum::<f64>() >= 1.0 - 1e-12);
    }

    #[test]
    fn momentum_eigenstate_is_flat_in_position() {
        let b = basis(16);
        let i = b.index(3).unwrap();
        let rho = QuantumState::basis_state(16, i).to_density();
        let g = wigner_transform(&rho, &b).unwrap();
        for a in 0..16 {
            let expected = if a == i { 1.0 / 16.0 } else { 0.0 };
            for c in 0..16 {
                assert!((g.coarse[(a, c)] - expected).abs() < 1e-14);
            }
        }
        // raw row l = 2n is uniform
        let row = 2 * i;
        assert!(g.raw.row(row).iter().all(|&w| (w - 1.0).abs() < 1e-12));
        assert_eq!(strangeness(&g), 0.0);
    }

    #[test]
    fn transform_is_linear() {
        let b = basis(16);
        let (r1, r2) = (random_density(16, 1), random_density(16, 2));
        let mix = DensityMatrix::new(&r1.elements * Complex64::new(0.3, 0.0) + &r2.elements * Complex64::new(0.7, 0.0));
        let (g1, g2, gm) = (
            wigner_transform(&r1, &b).unwrap(),
            wigner_transform(&r2, &b).unwrap(),
            wigner_transform(&mix, &b).unwrap(),
        );
        assert!(max_abs((&gm.coarse - (&g1.coarse * 0.3 + &g2.coarse * 0.7)).iter().copied()) < 1e-12);
        assert!((g1.normalization - g2.normalization).abs() < 1e-10 * g1.normalization);
    }

    #[test]
    fn strangeness_is_symmetric_under_reflection_and_translation() {
        let b = basis(32);
        let psi = gaussian_packet(&b, 5.0, 1.3).unwrap();
        let other = gaussian_packet(&b, -9.0, 2.0).unwrap();
        let mut sup = QuantumState::new(&psi.amplitudes + &other.amplitudes * Complex64::new(0.0, 1.0));
        sup.normalize();
        let rho = sup.to_density();
        let s = strangeness(&wigner_transform(&rho, &b).unwrap());
        assert!(s > 0.05);
        // p -> -p on the torus maps label n to -n modulo N
        let n = 32usize;
        let refl = |i: usize| (n - i) % n;
        let reflected = DensityMatrix::new(DMatrix::from_fn(n, n, |i, j| rho.elements[(refl(i), refl(j))]));
        let s_refl = strangeness(&wigner_transform(&reflected, &b).unwrap());
        // phi -> phi + shift multiplies <m|rho|n> by exp(-i (m - n) shift)
        let shift = 2.0 * PI * 3.0 / n as f64;
        let translated = DensityMatrix::new(DMatrix::from_fn(n, n, |i, j| {
            rho.elements[(i, j)] * Complex64::from_polar(1.0, -(i as f64 - j as f64) * shift)
        }));
        let s_tr = strangeness(&wigner_transform(&translated, &b).unwrap());
        assert!((s - s_tr).abs() < 1e-12, "{s} vs {s_tr}");
        // parity permutes the raw grid exactly; the 2x2 cells pair rows {2a, 2a+1}
        // and so shift by one raw row under reflection
        let g = wigner_transform(&rho, &b).unwrap();
        let gr = wigner_transform(&reflected, &b).unwrap();
        let m = 2 * n;
        for l in 0..m {
            for k in 0..m {
                assert!((gr.raw[(l, k)] - g.raw[((m - l) % m, (m - k) % m)]).abs() < 1e-12);
            }
        }
        assert!((s - s_refl).abs() < 1e-2 * s, "{s} vs {s_refl}");
    }

    #[test]
    fn diagonal_states_have_no_strangeness() {
        let cfg = KickConfig::with_k(280.0);
        let b = basis(128);
        let rho0 = initial_density(&cfg, &b).unwrap();
        assert_eq!(strangeness(&wigner_transform(&rho0, &b).unwrap()), 0.0);
        let u = build_period_operator(&cfg, &b).unwrap();
        let evolved = rho0.conjugate(&u).unwrap();
        assert!(strangeness(&wigner_transform(&evolved, &b).unwrap()) > 0.0);
        let measured = anti_zeno_map(&evolved);
        assert!(strangeness(&wigner_transform(&measured, &b).unwrap()) < 1e-12);
    }

    #[test]
    fn superposition_is_stranger_than_mixture() {
        let b = basis(128);
        let (m, s) = two_packet_strangeness(&b, 16.0, 2.0).unwrap();
        assert!(m >= 0.0 && s > m);
        assert!(gaussian_packet(&b, 0.0, 0.0).is_err());
    }

    #[test]
    fn sweep_covers_every_pair() {
        let rows = strangeness_sweep(&KickConfig::default(), &basis(64), &[40.0, 90.0], &[0.0, 0.05], 3).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.strangeness >= 0.0));
    }
}
