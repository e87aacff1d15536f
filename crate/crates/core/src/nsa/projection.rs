use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::modes::ModeTable;
use crate::error::{Error, Result};
use crate::harness::persist::fmt_f64;
use crate::qstate::{PhysicalParams, WaveFunction};
use crate::sde::SplitStepper;

/// Reconstruction residual above which a projection is rejected.
pub const MAX_PROJECTION_RESIDUAL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub coefficients: Vec<Complex64>,
    /// ‖ψ − Σ c_n u_n‖ / ‖ψ‖.
    pub residual: f64,
}

/// c_n = ∫u_n(x)ψ(x)dx (no conjugation) for n ≤ table.n_max().
pub fn project_with(psi: &WaveFunction, table: &ModeTable) -> Result<Projection> {
    if psi.grid() != table.grid() {
        return Err(Error::InvalidGrid("state and mode table grids differ".into()));
    }
    let dx = table.grid().dx();
    let coefficients: Vec<Complex64> = (0..=table.n_max())
        .map(|n| {
            table
                .profile(n)
                .iter()
                .zip(psi.amplitudes())
                .map(|(u, v)| u * v)
                .sum::<Complex64>()
                * dx
        })
        .collect();
    let rebuilt = table.reconstruct(&coefficients)?;
    let residual = psi.distance(&rebuilt) / psi.norm();
    if !(residual <= MAX_PROJECTION_RESIDUAL) {
        return Err(Error::IllConditioned(residual));
    }
    Ok(Projection {
        coefficients,
        residual,
    })
}

pub fn bilinear_project(psi: &WaveFunction, n_max: usize, params: &PhysicalParams) -> Result<Projection> {
    project_with(psi, &ModeTable::new(n_max, params, psi.grid())?)
}

/// c_n(t) = c_n(0) exp[−(1 + i)ω_n t/2], ω_n = (n + 1/2)ω.
pub fn evolve_modes(coefficients: &[Complex64], t: f64, params: &PhysicalParams) -> Vec<Complex64> {
    let omega = params.omega();
    coefficients
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let wn = (n as f64 + 0.5) * omega;
            c * (Complex64::new(-0.5, -0.5) * wn * t).exp()
        })
        .collect()
}

/// Normalized damped-flow evolution on the grid for round(t/dt) steps.
pub fn evolve_nsa_grid(psi: &WaveFunction, t: f64, dt: f64, params: &PhysicalParams) -> Result<WaveFunction> {
    let mut stepper = SplitStepper::unguarded(*psi.grid(), *params, dt)?;
    let mut out = psi.normalized()?;
    let n = (t / dt).round() as usize;
    for j in 0..n {
        stepper
            .step_damped(&mut out)
            .map_err(|e| e.at_step(j + 1, (j + 1) as f64 * dt))?;
    }
    Ok(out)
}

/// φ(x) = e^{log_prefactor} e^{i k_shift x} Σ c_n u_n(x − x_shift).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeExpansion {
    pub coefficients: Vec<Complex64>,
    pub x_shift: f64,
    pub k_shift: f64,
    pub log_prefactor: Complex64,
    pub residual: f64,
}

impl ModeExpansion {
    /// |c_0| / max_{n≥1} |c_n|.
    pub fn ground_dominance(&self) -> f64 {
        let rest = self.coefficients[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.coefficients[0].norm() / rest
    }

    /// CSV with columns n, re, im.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_coefficients_csv(&self.coefficients, w)
    }
}

pub fn write_coefficients_csv<W: Write>(coefficients: &[Complex64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "re", "im"])?;
    for (n, c) in coefficients.iter().enumerate() {
        out.write_record([n.to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// Expansion of an unnormalized state about its own mean position and
/// wavenumber. The prefactor carries the norm, so the coefficients
/// describe the unit-norm remainder.
pub fn shifted_expand(phi: &WaveFunction, params: &PhysicalParams, n_max: usize) -> Result<ModeExpansion> {
    let table = ModeTable::new(n_max, params, phi.grid())?;
    shifted_expand_with(phi, &table)
}

pub fn shifted_expand_with(phi: &WaveFunction, table: &ModeTable) -> Result<ModeExpansion> {
    let norm = phi.norm();
    let unit = phi.normalized()?;
    let obs = unit.observables(table.params())?;
    let x_shift = obs.q_mean;
    let k_shift = obs.p_mean / table.params().hbar;
    let grid = *phi.grid();
    // r(y) = e^{−i k (y + x̄)} ψ(y + x̄)
    let mut rest = unit.translated(-x_shift);
    for (j, a) in rest.amplitudes_mut().iter_mut().enumerate() {
        *a *= Complex64::from_polar(1.0, -k_shift * (grid.x(j) + x_shift));
    }
    let projection = project_with(&rest, table)?;
    Ok(ModeExpansion {
        coefficients: projection.coefficients,
        x_shift,
        k_shift,
        log_prefactor: Complex64::new(norm.ln(), 0.0),
        residual: projection.residual,
    })
}
