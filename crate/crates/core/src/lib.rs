//! Stochastic collapse dynamics for a particle continuously localized in
//! position: grid and Gaussian integrators, the decaying-mode spectrum of
//! the averaged dynamics, and collapse diagnostics.

pub mod error;
pub mod gaussian_flow;
pub mod harness;
pub mod metrics;
pub mod nsa;
pub mod qstate;
pub mod record;
pub mod regimes;
pub mod sde;

pub use error::{Error, Result};
pub use qstate::{GaussianState, GridSpec, PhysicalParams, WaveFunction};
