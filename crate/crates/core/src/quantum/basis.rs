use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pulse::INNER_BOUNDARY;

/// Truncated momentum ladder `n = -N/2 .. N/2 - 1` with offset `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumBasis {
    size: usize,
    hbar: f64,
    q: f64,
}

impl MomentumBasis {
    pub const DEFAULT_SIZE: usize = 128;

    pub fn new(size: usize, hbar: f64, q: f64) -> Result<Self> {
        if size < 2 || !size.is_multiple_of(2) {
            return Err(invalid("basis_size", format!("must be even and at least 2, got {size}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(invalid("hbar", format!("must be positive, got {hbar}")));
        }
        if !(-0.5..0.5).contains(&q) {
            return Err(invalid("q", format!("quasi-momentum must lie in [-1/2, 1/2), got {q}")));
        }
        Ok(Self { size, hbar, q })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn quasi_momentum(&self) -> f64 {
        self.q
    }

    pub fn with_quasi_momentum(&self, q: f64) -> Result<Self> {
        Self::new(self.size, self.hbar, q)
    }

    pub fn n_min(&self) -> i64 {
        -(self.size as i64 / 2)
    }

    pub fn n_max(&self) -> i64 {
        self.size as i64 / 2 - 1
    }

    /// Ladder label of array index `i`.
    pub fn label(&self, i: usize) -> i64 {
        i as i64 + self.n_min()
    }

    /// Array index of ladder label `n`, if it lies in the basis.
    pub fn index(&self, n: i64) -> Option<usize> {
        (self.n_min()..=self.n_max())
            .contains(&n)
            .then(|| (n - self.n_min()) as usize)
    }

    /// Physical momentum `(n + q) hbar` of array index `i`.
    pub fn momentum(&self, i: usize) -> f64 {
        (self.label(i) as f64 + self.q) * self.hbar
    }

    /// Largest physical momentum magnitude represented, `hbar |n_min|`.
    pub fn reach(&self) -> f64 {
        self.hbar * self.n_min().unsigned_abs() as f64
    }

    /// Whether index `i` lies strictly beyond the inner cantori.
    pub fn is_outside(&self, i: usize) -> bool {
        self.momentum(i).abs() > INNER_BOUNDARY
    }
}
