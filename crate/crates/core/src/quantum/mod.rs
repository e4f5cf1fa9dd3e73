//! Quantum evolution on a truncated momentum ladder.
//!
//! Momentum states `|n>` carry physical momentum `(n + q) hbar` with
//! `n in {-N/2, ..., N/2 - 1}` and quasi-momentum offset `q`. During a pulse
//! `H = p^2/2 - K cos(phi)` is time independent and tridiagonal in this
//! basis, so each segment of the period is exponentiated exactly.

mod basis;
mod operator;
mod state;

pub use basis::MomentumBasis;
pub(crate) use operator::require_unitary;
pub use operator::{build_period_operator, PeriodOperator, PulsePropagator};
pub use state::{evolve_density, initial_density, momentum_distribution, DensityMatrix, Evolution, QuantumState};

pub use num_complex::Complex64;

/// `max |A_ij|`.
pub fn max_abs<T: Copy + Into<Complex64>>(entries: impl IntoIterator<Item = T>) -> f64 {
    entries
        .into_iter()
        .map(|z| z.into().norm())
        .fold(0.0, f64::max)
}

