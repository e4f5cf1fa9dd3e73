//! The double rectangular pulse train and its Fourier content.
//!
//! Within each unit period the potential is switched on during two windows of
//! width `alpha / 2`: the first starts at `t = 0`, the second at `t = delta`.
//! Expanding the train in harmonics gives coefficients
//! `a_m = alpha * sinc(m pi alpha / 2) * cos(m pi delta)` (after centering the
//! pair on its midpoint). At `alpha = delta = 0.1` this vanishes at `m = 5`
//! and `m = 15`, which is what pins invariant curves near `p = ±10π` and
//! `p = ±30π`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Momentum of the cantori separating the central region from the wings.
pub const INNER_BOUNDARY: f64 = 10.0 * PI;
/// Momentum of the outer KAM tori that enclose the diffusing region.
pub const OUTER_BOUNDARY: f64 = 30.0 * PI;

/// Dimensionless parameters of the double-kicked rotor.
///
/// The kick period is fixed at 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    /// Kicking strength `K`.
    #[serde(rename = "K")]
    pub k: f64,
    /// Twice the width of a single pulse.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Separation of the leading edges of the two pulses.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Effective Planck constant.
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    /// Standard deviation of the initial momentum distribution.
    #[serde(default = "default_sigma_p")]
    pub sigma_p: f64,
}

fn default_alpha() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.1
}
fn default_hbar() -> f64 {
    2.6
}
fn default_sigma_p() -> f64 {
    3.6 * PI
}

impl Default for KickConfig {
    fn default() -> Self {
        Self {
            k: 0.0,
            alpha: default_alpha(),
            delta: default_delta(),
            hbar: default_hbar(),
            sigma_p: default_sigma_p(),
        }
    }
}

impl KickConfig {
    /// Default pulse geometry with kicking strength `k`.
    pub fn with_k(k: f64) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.k, self.alpha, self.delta, self.hbar, self.sigma_p]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("K", "all parameters must be finite"));
        }
        if self.k < 0.0 {
            return Err(invalid("K", format!("must be non-negative, got {}", self.k)));
        }
        if self.alpha <= 0.0 {
            return Err(invalid("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if self.delta < self.alpha / 2.0 {
            return Err(invalid(
                "delta",
                format!("pulses overlap: delta {} < alpha/2 {}", self.delta, self.alpha / 2.0),
            ));
        }
        if self.delta + self.alpha / 2.0 > 1.0 {
            return Err(invalid(
                "delta",
                format!("second pulse ends at {} > period 1", self.delta + self.alpha / 2.0),
            ));
        }
        if self.hbar <= 0.0 {
            return Err(invalid("hbar", format!("must be positive, got {}", self.hbar)));
        }
        if self.sigma_p <= 0.0 {
            return Err(invalid("sigma_p", format!("must be positive, got {}", self.sigma_p)));
        }
        Ok(())
    }

    /// Width of one pulse.
    pub fn pulse_width(&self) -> f64 {
        self.alpha / 2.0
    }

    /// Free-flight time between the end of the first pulse and the start of the second.
    pub fn inner_gap(&self) -> f64 {
        self.delta - self.alpha / 2.0
    }

    /// Free-flight time from the end of the second pulse to the next period.
    pub fn outer_gap(&self) -> f64 {
        1.0 - self.delta - self.alpha / 2.0
    }

    /// Time-ordered segments of one period.
    pub fn segments(&self) -> [Segment; 4] {
        [
            Segment::Pulse(self.pulse_width()),
            Segment::Free(self.inner_gap()),
            Segment::Pulse(self.pulse_width()),
            Segment::Free(self.outer_gap()),
        ]
    }

    pub fn profile(&self) -> PulseProfile {
        PulseProfile::double(self.alpha, self.delta)
    }

    /// Fourier coefficient `a_m` of the pulse train (see [`fourier_coefficient`]).
    pub fn fourier_coefficient(&self, m: i64) -> f64 {
        fourier_coefficient(self.alpha, self.delta, m)
    }
}

/// One piece of the kick period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    /// Potential on for the given duration.
    Pulse(f64),
    /// Free rotation for the given duration.
    Free(f64),
}

/// On-windows of the pulse train within one period.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseProfile {
    pub windows: Vec<(f64, f64)>,
}

impl PulseProfile {
    pub fn double(alpha: f64, delta: f64) -> Self {
        let w = alpha / 2.0;
        Self {
            windows: vec![(0.0, w), (delta, delta + w)],
        }
    }

    /// `1` inside a window, `0` outside. `t` is reduced modulo the period.
    pub fn value(&self, t: f64) -> u8 {
        let t = t.rem_euclid(1.0);
        u8::from(self.windows.iter().any(|&(a, b)| t >= a && t < b))
    }

    pub fn on_time(&self) -> f64 {
        self.windows.iter().map(|(a, b)| b - a).sum()
    }
}

/// `sin(x) / x`, with a series branch near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Harmonic `m` of the double pulse train centred on the midpoint of the pair.
///
/// Equals `alpha * sinc(m pi alpha / 2) * cos(m pi delta)`; at the default
/// geometry this is `(1/10) sinc(m pi / 20) cos(m pi / 10)`.
pub fn fourier_coefficient(alpha: f64, delta: f64, m: i64) -> f64 {
    let m = m as f64;
    alpha * sinc(m * PI * alpha / 2.0) * cos_pi(m * delta)
}

/// `cos(pi x)` with exact zeros at half-integers.
fn cos_pi(x: f64) -> f64 {
    let r = x.abs().rem_euclid(2.0);
    // Exact zeros where r is a half-integer
    if r == 0.5 || r == 1.5 {
        return 0.0;
    }
    (PI * r).cos()
}

/// `f(t)` for the rectangular double pulse at configuration `cfg`.
pub fn pulse_value(cfg: &KickConfig, t: f64) -> u8 {
    cfg.profile().value(t)
}

/// Partial Fourier sum of the pulse train, `sum_{|m| <= m_max} a_m cos(2 pi m (t - c))`
/// with `c` the midpoint of the pulse pair.
pub fn reconstruct_profile(cfg: &KickConfig, t: f64, m_max: u32) -> f64 {
    let centre = (cfg.delta + cfg.alpha / 2.0) / 2.0;
    let mut sum = cfg.fourier_coefficient(0);
    for m in 1..=i64::from(m_max) {
        sum += 2.0 * cfg.fourier_coefficient(m) * (2.0 * PI * m as f64 * (t - centre)).cos();
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_examples() {
        let cfg = KickConfig::default();
        assert!((cfg.fourier_coefficient(0) - 0.1).abs() < 1e-15);
        assert!(cfg.fourier_coefficient(5).abs() < 1e-15);
        assert!(cfg.fourier_coefficient(15).abs() < 1e-15);
        let expected = -0.1 * (2.0 / PI);
        assert!((cfg.fourier_coefficient(10) - expected).abs() < 1e-15);
        assert!((expected + 0.06366).abs() < 1e-5);
    }

    #[test]
    fn matches_closed_form_at_default_geometry() {
        for m in -60..=60 {
            let mf = m as f64;
            let closed = 0.1 * sinc(mf * PI / 20.0) * (mf * PI / 10.0).cos();
            assert!((fourier_coefficient(0.1, 0.1, m) - closed).abs() < 1e-15, "m = {m}");
        }
    }

    #[test]
    fn coefficient_is_even() {
        for &(a, d) in &[(0.1, 0.1), (0.2, 0.35), (0.05, 0.5)] {
            for m in 0..40 {
                assert_eq!(fourier_coefficient(a, d, m), fourier_coefficient(a, d, -m));
            }
        }
    }

    /// Direct quadrature of the pulse train against exp(-2 pi i m (t - c)).
    #[test]
    fn coefficient_matches_quadrature() {
        let (alpha, delta) = (0.16, 0.3);
        let cfg = KickConfig { alpha, delta, ..KickConfig::with_k(1.0) };
        let centre = (delta + alpha / 2.0) / 2.0;
        let n = 200_000;
        for m in 0..12 {
            let mut acc = 0.0;
            for i in 0..n {
                let t = (i as f64 + 0.5) / n as f64;
                if pulse_value(&cfg, t) == 1 {
                    acc += (2.0 * PI * m as f64 * (t - centre)).cos();
                }
            }
            acc /= n as f64;
            assert!((acc - cfg.fourier_coefficient(m)).abs() < 1e-6, "m = {m}");
        }
    }

    #[test]
    fn pulse_windows() {
        let cfg = KickConfig::default();
        assert_eq!(pulse_value(&cfg, 0.01), 1);
        assert_eq!(pulse_value(&cfg, 0.07), 0);
        assert_eq!(pulse_value(&cfg, 0.12), 1);
        assert_eq!(pulse_value(&cfg, 0.5), 0);
        assert!((cfg.profile().on_time() - 0.1).abs() < 1e-15);
        let w = cfg.profile().windows;
        assert_eq!(w.len(), 2);
        for (got, want) in w.iter().zip([(0.0, 0.05), (0.1, 0.15)]) {
            assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15);
        }
    }

    #[test]
    fn partial_sum_converges_away_from_edges() {
        let cfg = KickConfig::default();
        assert!(reconstruct_profile(&cfg, 0.07, 2000).abs() < 0.01);
        assert!((reconstruct_profile(&cfg, 0.02, 2000) - 1.0).abs() < 0.01);
        assert!((reconstruct_profile(&cfg, 0.6, 2000)).abs() < 0.01);
    }

    #[test]
    fn sinc_branches_agree() {
        for &x in &[1e-5f64, 9.9e-5, 1.01e-4, -3e-5] {
            let direct = x.sin() / x;
            assert!((sinc(x) - direct).abs() < 1e-15);
        }
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn validation() {
        assert!(KickConfig::with_k(280.0).validate().is_ok());
        let bad = KickConfig { delta: 0.01, ..KickConfig::default() };
        assert!(bad.validate().is_err());
        let bad = KickConfig { delta: 0.97, ..KickConfig::default() };
        assert!(bad.validate().is_err());
        let bad = KickConfig { k: -1.0, ..KickConfig::default() };
        assert!(bad.validate().is_err());
    }
}
