pub mod classical;
pub mod decoherence;
pub mod diffusion;
pub mod elliptic;
pub mod error;
pub mod experiment;
pub mod floquet;
pub mod pulse;
pub mod quantum;
pub mod wigner;

pub use error::{Error, Result};
