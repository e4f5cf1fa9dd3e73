//! Three-region diffusion model for transport through the `p = ±10π` cantori.
//!
//! The band `|p| < 30π` is split into three equal cells of phase-space area
//! `40π²`. Each kick maps an area `F` across each cantorus in both
//! directions, so starting from an empty exterior
//! `P(|p| > 10π, t) = (2/3)(1 - e^{a t})` with `a = ln(1 - 3F / 40π²)`.
//! [`fit_flux`] inverts this on a simulated outside-fraction series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Phase-space area of each of the three regions.
pub const REGION_AREA: f64 = 40.0 * PI * PI;
/// Equilibrium outside fraction.
pub const EQUILIBRIUM_OUTSIDE: f64 = 2.0 / 3.0;
/// Points whose distance from equilibrium is below `e^-3` are excluded from fits.
pub const PROXIMITY_CUTOFF: f64 = 0.049_787_068_367_863_944; // e^-3
/// Largest `|a|` for which the model is considered applicable.
pub const MAX_VALID_RATE: f64 = 0.5;
/// Minimum number of usable points for an accepted fit.
pub const MIN_FIT_POINTS: usize = 5;
/// Minimum series length accepted by [`fit_flux`].
pub const MIN_SERIES_LEN: usize = 10;

fn check_flux(flux: f64, t: f64) -> Result<f64> {
    let x = 3.0 * flux / REGION_AREA;
    if !(0.0..1.0).contains(&x) || !flux.is_finite() {
        return Err(invalid("flux", format!("3F/40pi^2 must lie in [0, 1), got {x}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(invalid("t", format!("must be non-negative, got {t}")));
    }
    Ok(x)
}

/// Per-kick decay rate `a = ln(1 - 3F/40π²)`.
pub fn decay_rate(flux: f64) -> f64 {
    (-3.0 * flux / REGION_AREA).ln_1p()
}

/// Inverse of [`decay_rate`].
pub fn flux_from_rate(rate: f64) -> f64 {
    -REGION_AREA / 3.0 * rate.exp_m1()
}

/// Probability of being inside the cantori after `t` kicks.
pub fn model_inside(flux: f64, t: f64) -> Result<f64> {
    let x = check_flux(flux, t)?;
    Ok(1.0 / 3.0 + 2.0 / 3.0 * (1.0 - x).powf(t))
}

/// Probability of being outside the cantori after `t` kicks.
pub fn model_outside(flux: f64, t: f64) -> Result<f64> {
    let x = check_flux(flux, t)?;
    Ok(2.0 / 3.0 * -(t * (-x).ln_1p()).exp_m1())
}

/// Kicks included in a fit before the proximity rule is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_min: usize,
    pub t_max: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { t_min: 5, t_max: 50 }
    }
}

/// Result of fitting the diffusion model to an outside-fraction series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionFit {
    /// Phase-space flux per kick `F`.
    pub flux: f64,
    /// Fitted slope `a` of `ln(2/3 - P_out)`.
    pub rate: f64,
    pub intercept: f64,
    /// First and last kick actually used.
    pub fit_window: (usize, usize),
    /// RMS residual of the straight-line fit.
    pub residual: f64,
    pub n_used: usize,
    /// Points with `P_out >= 2/3` (log undefined).
    pub n_dropped: usize,
    /// Points within `e^-3` of equilibrium.
    pub n_near_equilibrium: usize,
    /// At least [`MIN_FIT_POINTS`] usable points remained.
    pub accepted: bool,
    /// `|a| < 0.5`.
    pub small_rate: bool,
}

pub fn fit_flux(series: &[f64]) -> Result<DiffusionFit> {
    fit_flux_window(series, FitWindow::default())
}

/// Least-squares line through `ln(2/3 - P_out(t))`, `t` the kick index into `series`.
pub fn fit_flux_window(series: &[f64], window: FitWindow) -> Result<DiffusionFit> {
    if series.len() < MIN_SERIES_LEN {
        return Err(invalid(
            "series",
            format!("need at least {MIN_SERIES_LEN} points, got {}", series.len()),
        ));
    }
    if let Some(bad) = series.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(invalid("series", format!("probabilities must lie in [0, 1], found {bad}")));
    }
    if window.t_min > window.t_max {
        return Err(invalid("fit_window", "t_min exceeds t_max"));
    }
    let mut n_dropped = 0;
    let mut n_near = 0;
    let mut points = Vec::new();
    let last = window.t_max.min(series.len() - 1);
    for (t, &p) in series.iter().enumerate().take(last + 1).skip(window.t_min) {
        let gap = EQUILIBRIUM_OUTSIDE - p;
        if gap <= 0.0 {
            n_dropped += 1;
        } else if gap < PROXIMITY_CUTOFF {
            n_near += 1;
        } else {
            points.push((t as f64, gap.ln()));
        }
    }
    let n_used = points.len();
    let fit_window = match (points.first(), points.last()) {
        (Some(a), Some(b)) => (a.0 as usize, b.0 as usize),
        _ => (window.t_min, window.t_min),
    };
    if n_used < 2 {
        return Ok(DiffusionFit {
            flux: f64::NAN,
            rate: f64::NAN,
            intercept: f64::NAN,
            fit_window,
            residual: f64::NAN,
            n_used,
            n_dropped,
            n_near_equilibrium: n_near,
            accepted: false,
            small_rate: false,
        });
    }
    let (slope, intercept, residual) = least_squares_line(&points);
    Ok(DiffusionFit {
        flux: flux_from_rate(slope),
        rate: slope,
        intercept,
        fit_window,
        residual,
        n_used,
        n_dropped,
        n_near_equilibrium: n_near,
        accepted: n_used >= MIN_FIT_POINTS,
        small_rate: slope.abs() < MAX_VALID_RATE,
    })
}

/// Unweighted ordinary least squares; returns `(slope, intercept, rms residual)`.
fn least_squares_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}
