//! Time integration of the linear and nonlinear collapse equations, the
//! noise change connecting them, and the finite-dimensional testbed.

mod evolve;
mod finite;
mod noise;
mod stepper;

pub use evolve::{evolve, girsanov_transform, Diagnostics, EvolveOptions, GridScheme};
pub use finite::{step_finite, FiniteState, MAX_FINITE_DIM};
pub use noise::{NoiseKind, NoisePath};
pub use stepper::{
    step_linear, step_nonlinear, SplitStepper, MAX_INCREMENT_SIGMAS, MAX_STEP_EXPONENT,
};
