//! Eigenmodes of the damped oscillator p²/2m − iħλq², projections onto
//! them under the bilinear pairing, and mode-space evolution.

mod modes;
mod projection;

pub use modes::{
    apply_nsa_hamiltonian, eigenmode, hermite_functions, mode_eigenvalue, spectral_residual, ModeTable,
    NsaMode, DEFAULT_N_MAX, MAX_MODE,
};
pub use projection::{
    bilinear_project, evolve_modes, evolve_nsa_grid, project_with, shifted_expand, shifted_expand_with,
    write_coefficients_csv, ModeExpansion, Projection, MAX_PROJECTION_RESIDUAL,
};
