//! Grid wave functions, observables and physical constants.

mod fourier;
mod grid;
pub mod io;
mod params;
mod wavefunction;

pub use fourier::Fourier;
pub use grid::GridSpec;
pub use params::{PhysicalParams, UnitSystem, HBAR_SI, LAMBDA0_SI, MASS0_SI};
pub use wavefunction::{
    render_gaussian, render_gaussian_with_tolerance, GaussianState, Observables, WaveFunction,
    DEFAULT_BOUNDARY_TOLERANCE, ZERO_NORM,
};
