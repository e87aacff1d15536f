use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{PhysicalParams, WaveFunction};

/// Spread of the non-Hermitian operator A = q − z²/(2λm)·p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AVariance {
    /// ‖(A − ⟨A⟩)ψ‖² for unit ψ.
    pub delta_a2: f64,
    pub mean_a: Complex64,
}

/// Coefficient multiplying p in A.
pub fn a_momentum_coefficient(params: &PhysicalParams) -> Complex64 {
    -params.z2() / (2.0 * params.lambda * params.mass)
}

/// ΔA² of a grid state; coherent members of the attractor family are
/// eigenvectors of A, so this vanishes on them.
pub fn operator_a_variance(psi: &WaveFunction, params: &PhysicalParams) -> Result<AVariance> {
    let unit = psi.normalized()?;
    let p_psi = unit.apply_momentum(params);
    let c = a_momentum_coefficient(params);
    let grid = *unit.grid();
    let a_psi: Vec<Complex64> = unit
        .amplitudes()
        .iter()
        .zip(p_psi.amplitudes())
        .enumerate()
        .map(|(j, (v, pv))| v * grid.x(j) + c * pv)
        .collect();
    let dx = grid.dx();
    let mean_a: Complex64 = unit
        .amplitudes()
        .iter()
        .zip(&a_psi)
        .map(|(v, av)| v.conj() * av)
        .sum::<Complex64>()
        * dx;
    let delta_a2 = unit
        .amplitudes()
        .iter()
        .zip(&a_psi)
        .map(|(v, av)| (av - mean_a * v).norm_sqr())
        .sum::<f64>()
        * dx;
    if !delta_a2.is_finite() {
        return Err(Error::ZeroNorm(f64::NAN));
    }
    Ok(AVariance { delta_a2, mean_a })
}
