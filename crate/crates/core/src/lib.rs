//! Decay of prepared states in a cavity closed by a delta barrier.
//!
//! The model is `H = -d²/dx² + δ(x - π)/(πg)` on the half-line `x >= 0`
//! with a hard wall at the origin.

pub mod config;
pub mod error;
pub mod evolution;
pub mod observables;
pub mod poles;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use config::Tolerances;
pub use error::{DecayError, Result};
pub use evolution::{InitialState, Propagator, Route, WaveSample};
pub use poles::{find_pole, PoleTable, ResonancePole};
pub use spectral::{bound_state, BoundState, Coupling};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
