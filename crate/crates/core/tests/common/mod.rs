#![allow(dead_code)]

use std::f64::consts::PI;

use kickrotor::classical::{angle_diff, PhasePoint};
use kickrotor::diffusion::REGION_AREA;
use kickrotor::pulse::{KickConfig, Segment};
use kickrotor::quantum::{Complex64, MomentumBasis};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Pair = [f64; 2];

fn rk4(y: Pair, h: f64, k: f64) -> Pair {
    let f = |s: Pair| [s[1], -k * s[0].sin()];
    let add = |s: Pair, d: Pair, c: f64| [s[0] + c * d[0], s[1] + c * d[1]];
    let k1 = f(y);
    let k2 = f(add(y, k1, h / 2.0));
    let k3 = f(add(y, k2, h / 2.0));
    let k4 = f(add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Pendulum flow by step-doubling RK4 with Richardson correction.
pub fn rk_pendulum(y: Pair, duration: f64, k: f64, tol: f64) -> Pair {
    let mut y = y;
    let mut t = 0.0;
    let mut h = duration / 64.0;
    while t < duration {
        h = h.min(duration - t);
        let full = rk4(y, h, k);
        let half = rk4(rk4(y, h / 2.0, k), h / 2.0, k);
        let err = ((half[0] - full[0]).abs()).max((half[1] - full[1]).abs()) / 15.0;
        if err <= tol || h < 1e-12 {
            t += h;
            y = [half[0] + (half[0] - full[0]) / 15.0, half[1] + (half[1] - full[1]) / 15.0];
        }
        let grow = if err == 0.0 { 2.0 } else { 0.9 * (tol / err).powf(0.2) };
        h *= grow.clamp(0.2, 2.0);
    }
    y
}

pub fn rk_kick_cycle(s: PhasePoint, cfg: &KickConfig, tol: f64) -> PhasePoint {
    let mut y = [s.phi, s.p];
    for seg in cfg.segments() {
        y = match seg {
            Segment::Pulse(w) => rk_pendulum(y, w, cfg.k, tol),
            Segment::Free(w) => [y[0] + y[1] * w, y[1]],
        };
    }
    PhasePoint::new(y[0], y[1])
}

/// Determinant of the Jacobian of `map` at `s` by fourth-order central differences.
pub fn jacobian_det(map: impl Fn(PhasePoint) -> PhasePoint, s: PhasePoint, h: f64) -> f64 {
    let column = |dphi: f64, dp: f64| {
        let at = |c: f64| map(PhasePoint::new(s.phi + c * dphi, s.p + c * dp));
        let base = map(s);
        let rel = |q: PhasePoint| [angle_diff(q.phi, base.phi), q.p - base.p];
        let (a, b, c, d) = (rel(at(2.0 * h)), rel(at(h)), rel(at(-h)), rel(at(-2.0 * h)));
        let der = |i: usize| (-a[i] + 8.0 * b[i] - 8.0 * c[i] + d[i]) / (12.0 * h);
        [der(0), der(1)]
    };
    let c1 = column(1.0, 0.0);
    let c2 = column(0.0, 1.0);
    c1[0] * c2[1] - c1[1] * c2[0]
}

/// Pulse propagator by fourth-order (Yoshida) split-operator steps.
///
/// The hard-wall `cos(phi)` matrix is diagonal in the discrete sine basis, so the
/// potential factor uses the closed-form sine transform.
pub fn split_operator_pulse(basis: &MomentumBasis, k: f64, w: f64, substeps: u32) -> DMatrix<Complex64> {
    let n = basis.size();
    let hbar = basis.hbar();
    let norm = (2.0 / (n as f64 + 1.0)).sqrt();
    let sine = DMatrix::from_fn(n, n, |j, m| {
        Complex64::new(norm * (PI * ((j + 1) * (m + 1)) as f64 / (n as f64 + 1.0)).sin(), 0.0)
    });
    let kinetic: Vec<f64> = (0..n).map(|i| 0.5 * basis.momentum(i).powi(2)).collect();
    let potential: Vec<f64> = (1..=n)
        .map(|m| -k * (PI * m as f64 / (n as f64 + 1.0)).cos())
        .collect();
    let diag = |e: &[f64], tau: f64| {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, -e[i] * tau / hbar)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let strang = |tau: f64| {
        let half_t = diag(&kinetic, tau / 2.0);
        let v = &sine * diag(&potential, tau) * &sine;
        &half_t * v * &half_t
    };
    let cbrt2 = 2f64.powf(1.0 / 3.0);
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 / (2.0 - cbrt2);
    let h = w / substeps as f64;
    let step = strang(w1 * h) * strang(w0 * h) * strang(w1 * h);
    power(step, substeps)
}

fn power(mut base: DMatrix<Complex64>, mut e: u32) -> DMatrix<Complex64> {
    let n = base.nrows();
    let mut acc = DMatrix::<Complex64>::identity(n, n);
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// Free rotation for time `w`, diagonal in momentum.
pub fn free_matrix(basis: &MomentumBasis, w: f64) -> DMatrix<Complex64> {
    let n = basis.size();
    let hbar = basis.hbar();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -0.5 * basis.momentum(i).powi(2) * w / hbar)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Column `n0` holds `(1/T) sum_{t<T} |<n|U^t|n0>|^2` for every start state.
pub fn long_time_average(u: &DMatrix<Complex64>, periods: usize) -> DMatrix<f64> {
    let n = u.nrows();
    let mut psi = DMatrix::<Complex64>::identity(n, n);
    let mut sum = DMatrix::<f64>::zeros(n, n);
    for _ in 0..periods {
        sum += psi.map(|z| z.norm_sqr());
        psi = u * psi;
    }
    sum / periods as f64
}

/// Outside fraction of a three-cell Markov chain: each kick an inner walker
/// hops to either outer cell with probability `F / A`, an outer one returns with `F / A`.
pub fn markov_chain_series(flux: f64, walkers: usize, kicks: usize, seed: u64) -> Vec<f64> {
    let p = flux / REGION_AREA;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outside = vec![false; walkers];
    let mut series = Vec::with_capacity(kicks + 1);
    series.push(0.0);
    for _ in 0..kicks {
        for o in outside.iter_mut() {
            let x: f64 = rng.random();
            *o = if *o { x >= p } else { x < 2.0 * p };
        }
        series.push(outside.iter().filter(|&&o| o).count() as f64 / walkers as f64);
    }
    series
}

/// Centered moving average over `window` consecutive points.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    series
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn report(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{tag}] {name}: {detail}");
    pass
}
