//! Classical trajectories of the double-kicked rotor.
//!
//! With rectangular pulses the motion alternates between an exactly solvable
//! pendulum (`H = p^2/2 - K cos phi`) and free rotation, so one period is a
//! composition of four closed-form maps. The pendulum segment uses Jacobi
//! elliptic functions with separate libration and rotation branches.

mod ensemble;
pub mod ode;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_k, incomplete_f_parts, jacobi};
use crate::pulse::{KickConfig, Segment};

pub use ensemble::{
    outside_fraction, poincare_section, propagate_ensemble, sample_initial, strobe_orbits, trajectory_rng,
    ClassicalEnsemble,
    EnsembleRun, MomentumHistogram, HISTOGRAM_BINS, HISTOGRAM_HALF_WIDTH,
};

/// Relative width of the energy band around the separatrix handed to the ODE fallback.
pub const SEPARATRIX_BAND: f64 = 1e-9;
const FALLBACK_TOL: f64 = 1e-13;

/// A point `(phi, p)` of the cylinder; `phi` lives in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub phi: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(phi: f64, p: f64) -> Self {
        Self { phi: wrap_angle(phi), p }
    }

    /// Pendulum energy `p^2/2 - K cos phi`.
    pub fn energy(&self, k: f64) -> f64 {
        0.5 * self.p * self.p - k * self.phi.cos()
    }

    /// Momentum reflection `(phi, p) -> (-phi, -p)`, a symmetry of the flow.
    pub fn reflected(&self) -> Self {
        Self::new(-self.phi, -self.p)
    }
}

/// Reduces an angle into `[0, 2pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed angular difference reduced to `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

pub fn free_step(s: PhasePoint, w: f64) -> PhasePoint {
    debug_assert!(w >= 0.0);
    PhasePoint::new(s.phi + s.p * w, s.p)
}

/// Exact pendulum flow for time `w` at strength `k`.
pub fn pendulum_step(s: PhasePoint, w: f64, k: f64) -> PhasePoint {
    debug_assert!(w >= 0.0 && k >= 0.0);
    if k == 0.0 || w == 0.0 {
        return free_step(s, w);
    }
    // phi in (-pi, pi]
    let phi = if s.phi > PI { s.phi - TAU } else { s.phi };
    let p = s.p;
    let (sh, ch) = (0.5 * phi).sin_cos();
    let kinetic = 0.5 * p * p;
    // E + K and K - E, each formed without cancellation
    let above_bottom = kinetic + 2.0 * k * sh * sh;
    let below_top = 2.0 * k * ch * ch - kinetic;
    if above_bottom == 0.0 {
        return s;
    }
    if below_top.abs() < SEPARATRIX_BAND * k {
        let (phi1, p1) = ode::pendulum(phi, p, w, k, FALLBACK_TOL);
        return PhasePoint::new(phi1, p1);
    }
    let omega = k.sqrt();
    if below_top > 0.0 {
        librate(sh, ch, p, w, k, omega, above_bottom, below_top)
    } else {
        rotate(phi, sh, ch, p, w, k, omega, above_bottom, -below_top)
    }
}

/// Libration branch: `sin(phi/2) = kappa sn(omega t + u0)`, `p = 2 kappa omega cn(...)`.
#[allow(clippy::too_many_arguments)]
fn librate(
    sh: f64,
    ch: f64,
    p: f64,
    w: f64,
    k: f64,
    omega: f64,
    above_bottom: f64,
    below_top: f64,
) -> PhasePoint {
    let m = above_bottom / (2.0 * k);
    let mc = below_top / (2.0 * k);
    let kappa = m.sqrt();
    let sin_psi = sh / kappa;
    let cos_psi = p / (2.0 * kappa * omega);
    let quarter = complete_k(mc);
    // 1 - m sin^2(psi) = cos^2(phi/2)
    let partial = incomplete_f_parts(sin_psi, cos_psi.abs(), ch * ch);
    let u0 = if cos_psi >= 0.0 {
        partial
    } else if sin_psi >= 0.0 {
        2.0 * quarter - partial
    } else {
        -2.0 * quarter - partial
    };
    let u = reduce(u0 + omega * w, 4.0 * quarter);
    let j = jacobi(u, mc);
    let phi1 = 2.0 * (kappa * j.sn).atan2(j.dn);
    PhasePoint::new(phi1, 2.0 * kappa * omega * j.cn)
}

/// Rotation branch: `phi/2 = ±am(omega t / kappa + v0)`, `p = ±(2 omega / kappa) dn(...)`.
#[allow(clippy::too_many_arguments)]
fn rotate(
    phi: f64,
    sh: f64,
    ch: f64,
    p: f64,
    w: f64,
    k: f64,
    omega: f64,
    above_bottom: f64,
    above_top: f64,
) -> PhasePoint {
    let m = 2.0 * k / above_bottom;
    let mc = above_top / above_bottom;
    let kappa = m.sqrt();
    let sign = p.signum();
    let theta = sign * 0.5 * phi;
    let (sin_theta, cos_theta) = (sign * sh, ch);
    debug_assert!((theta.sin() - sin_theta).abs() < 1e-12);
    // 1 - m sin^2(theta) = (p^2/2) / (E + K)
    let delta2 = 0.5 * p * p / above_bottom;
    let v0 = incomplete_f_parts(sin_theta, cos_theta, delta2);
    let quarter = complete_k(mc);
    let v = reduce(v0 + omega * w / kappa, 2.0 * quarter);
    let j = jacobi(v, mc);
    // am(v) = atan2(sn, cn) modulo pi, and phi = 2 am
    let phi1 = sign * 2.0 * j.sn.atan2(j.cn);
    PhasePoint::new(phi1, sign * 2.0 * omega / kappa * j.dn)
}

/// Reduces `u` into `[-period/2, period/2)`.
fn reduce(u: f64, period: f64) -> f64 {
    u - period * (u / period).round()
}

fn step_segment(s: PhasePoint, seg: Segment, k: f64) -> PhasePoint {
    match seg {
        Segment::Pulse(w) => pendulum_step(s, w, k),
        Segment::Free(w) => free_step(s, w),
    }
}

/// One full period: pulse, gap, pulse, gap, starting at the leading edge of the first pulse.
pub fn kick_cycle(s: PhasePoint, cfg: &KickConfig) -> PhasePoint {
    cfg.segments()
        .into_iter()
        .fold(s, |acc, seg| step_segment(acc, seg, cfg.k))
}
