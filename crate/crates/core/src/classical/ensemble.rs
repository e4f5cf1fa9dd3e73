use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kick_cycle, PhasePoint};
use crate::error::{invalid, Result};
use crate::pulse::{KickConfig, INNER_BOUNDARY, OUTER_BOUNDARY};

pub const HISTOGRAM_BINS: usize = 128;
/// Histograms span `[-35 pi, 35 pi]`.
pub const HISTOGRAM_HALF_WIDTH: f64 = 35.0 * PI;

/// A cloud of independent trajectories.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassicalEnsemble {
    pub points: Vec<PhasePoint>,
    pub seed: u64,
    pub kick_count: usize,
}

impl ClassicalEnsemble {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reflected(&self) -> Self {
        Self {
            points: self.points.iter().map(PhasePoint::reflected).collect(),
            ..self.clone()
        }
    }
}

/// Per-trajectory generator: stream `index` of the ChaCha8 sequence for `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform in angle, Gaussian in momentum with spread `cfg.sigma_p`.
pub fn sample_initial(cfg: &KickConfig, n: usize, seed: u64) -> Result<ClassicalEnsemble> {
    if n == 0 {
        return Err(invalid("ensemble_size", "must be at least 1"));
    }
    cfg.validate()?;
    let normal = Normal::new(0.0, cfg.sigma_p).map_err(|e| invalid("sigma_p", e.to_string()))?;
    let points = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i as u64);
            let phi = rng.random::<f64>() * TAU;
            PhasePoint::new(phi, normal.sample(&mut rng))
        })
        .collect();
    Ok(ClassicalEnsemble { points, seed, kick_count: 0 })
}

/// Momentum histograms, one row per kick (row 0 is the initial ensemble).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
    /// Points below the first edge, per kick.
    pub underflow: Vec<u64>,
    /// Points above the last edge, per kick.
    pub overflow: Vec<u64>,
}

impl MomentumHistogram {
    fn empty(kicks: usize) -> Self {
        let width = 2.0 * HISTOGRAM_HALF_WIDTH / HISTOGRAM_BINS as f64;
        Self {
            bin_edges: (0..=HISTOGRAM_BINS)
                .map(|i| -HISTOGRAM_HALF_WIDTH + i as f64 * width)
                .collect(),
            counts: vec![vec![0; HISTOGRAM_BINS]; kicks + 1],
            underflow: vec![0; kicks + 1],
            overflow: vec![0; kicks + 1],
        }
    }

    fn record(&mut self, kick: usize, p: f64) {
        let width = 2.0 * HISTOGRAM_HALF_WIDTH / HISTOGRAM_BINS as f64;
        let pos = (p + HISTOGRAM_HALF_WIDTH) / width;
        if pos < 0.0 {
            self.underflow[kick] += 1;
        } else if pos >= HISTOGRAM_BINS as f64 {
            self.overflow[kick] += 1;
        } else {
            self.counts[kick][pos as usize] += 1;
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
        for (u, o) in self.underflow.iter_mut().zip(&other.underflow) {
            *u += o;
        }
        for (u, o) in self.overflow.iter_mut().zip(&other.overflow) {
            *u += o;
        }
        self
    }

    pub fn total(&self, kick: usize) -> u64 {
        self.counts[kick].iter().sum::<u64>() + self.underflow[kick] + self.overflow[kick]
    }

    /// Histogram with momentum reversed (bin `i` swapped with bin `BINS - 1 - i`).
    pub fn mirrored(&self) -> Self {
        Self {
            bin_edges: self.bin_edges.clone(),
            counts: self
                .counts
                .iter()
                .map(|row| row.iter().rev().copied().collect())
                .collect(),
            underflow: self.overflow.clone(),
            overflow: self.underflow.clone(),
        }
    }
}

/// Result of propagating an ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub histogram: MomentumHistogram,
    /// `P(|p| > 10 pi, t)` for `t = 0..=kicks`.
    pub outside_fraction: Vec<f64>,
    /// Trajectories that were strobed beyond `|p| = 30 pi` at least once.
    pub outer_crossings: usize,
    pub final_ensemble: ClassicalEnsemble,
}

struct Accumulator {
    histogram: MomentumHistogram,
    outside: Vec<u64>,
    crossings: usize,
}

/// Fraction of points with `|p|` strictly beyond the inner cantori.
pub fn outside_fraction(points: &[PhasePoint]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().filter(|s| s.p.abs() > INNER_BOUNDARY).count() as f64 / points.len() as f64
}

/// Propagates every trajectory through `kicks` periods, strobing at the start of each.
pub fn propagate_ensemble(
    ensemble: &ClassicalEnsemble,
    cfg: &KickConfig,
    kicks: usize,
) -> Result<EnsembleRun> {
    if kicks == 0 {
        return Err(invalid("kicks", "must be at least 1"));
    }
    cfg.validate()?;
    let n = ensemble.len();
    let fresh = || Accumulator {
        histogram: MomentumHistogram::empty(kicks),
        outside: vec![0; kicks + 1],
        crossings: 0,
    };
    let (acc, finals): (Accumulator, Vec<PhasePoint>) = {
        let results: Vec<(PhasePoint, Vec<f64>)> = ensemble
            .points
            .par_iter()
            .map(|&start| {
                let mut path = Vec::with_capacity(kicks + 1);
                let mut s = start;
                path.push(s.p);
                for _ in 0..kicks {
                    s = kick_cycle(s, cfg);
                    path.push(s.p);
                }
                (s, path)
            })
            .collect();
        let acc = results
            .par_iter()
            .fold(fresh, |mut acc, (_, path)| {
                let mut crossed = false;
                for (t, &p) in path.iter().enumerate() {
                    acc.histogram.record(t, p);
                    if p.abs() > INNER_BOUNDARY {
                        acc.outside[t] += 1;
                    }
                    crossed |= p.abs() > OUTER_BOUNDARY;
                }
                acc.crossings += usize::from(crossed);
                acc
            })
            .reduce(fresh, |a, b| Accumulator {
                histogram: a.histogram.merge(&b.histogram),
                outside: a.outside.iter().zip(&b.outside).map(|(x, y)| x + y).collect(),
                crossings: a.crossings + b.crossings,
            });
        (acc, results.into_iter().map(|(s, _)| s).collect())
    };
    Ok(EnsembleRun {
        histogram: acc.histogram,
        outside_fraction: acc.outside.iter().map(|&c| c as f64 / n as f64).collect(),
        outer_crossings: acc.crossings,
        final_ensemble: ClassicalEnsemble {
            points: finals,
            seed: ensemble.seed,
            kick_count: ensemble.kick_count + kicks,
        },
    })
}

/// Strobed orbits launched at `phi = 0` with momenta evenly spread over `[-32 pi, 32 pi]`.
///
/// Each orbit contributes its starting point plus one point per period.
pub fn poincare_section(
    cfg: &KickConfig,
    n_orbits: usize,
    n_periods: usize,
) -> Result<Vec<PhasePoint>> {
    if n_orbits == 0 {
        return Err(invalid("n_orbits", "must be at least 1"));
    }
    if n_periods == 0 {
        return Err(invalid("n_periods", "must be at least 1"));
    }
    cfg.validate()?;
    let span = 32.0 * PI;
    let starts: Vec<PhasePoint> = (0..n_orbits)
        .map(|i| {
            let frac = if n_orbits == 1 { 0.5 } else { i as f64 / (n_orbits - 1) as f64 };
            PhasePoint::new(0.0, -span + 2.0 * span * frac)
        })
        .collect();
    Ok(strobe_orbits(cfg, &starts, n_periods))
}

/// Strobed points of the given orbits, grouped orbit by orbit.
pub fn strobe_orbits(cfg: &KickConfig, starts: &[PhasePoint], n_periods: usize) -> Vec<PhasePoint> {
    starts
        .par_iter()
        .flat_map_iter(|&start| {
            std::iter::successors(Some(start), move |&s| Some(kick_cycle(s, cfg))).take(n_periods + 1)
        })
        .collect()
}
