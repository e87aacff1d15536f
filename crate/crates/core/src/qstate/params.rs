use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in SI units (J·s).
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Reference collapse strength used with the nucleon reference mass (m⁻² s⁻¹).
pub const LAMBDA0_SI: f64 = 1.00e-2;
/// Nucleon reference mass (kg).
pub const MASS0_SI: f64 = 1.67e-27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    Si,
    Natural,
}

/// Constants of the collapse dynamics.
///
/// `lambda0` and `mass0` are carried only for the mass-scaling relation
/// `lambda = lambda0 * mass / mass0`; the dynamics reads `hbar`, `mass`
/// and `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub lambda: f64,
    pub lambda0: f64,
    pub mass0: f64,
    pub unit_system: UnitSystem,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::natural()
    }
}

impl PhysicalParams {
    /// ħ = m = λ = 1.
    pub fn natural() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            lambda: 1.0,
            lambda0: 1.0,
            mass0: 1.0,
            unit_system: UnitSystem::Natural,
        }
    }

    /// Natural units with the collapse strength tied to the mass,
    /// `lambda = lambda0 * mass / mass0` with `hbar = lambda0 = mass0 = 1`.
    pub fn natural_scaled(mass: f64) -> Result<Self> {
        Self {
            hbar: 1.0,
            mass,
            lambda: mass,
            lambda0: 1.0,
            mass0: 1.0,
            unit_system: UnitSystem::Natural,
        }
        .validated()
    }

    /// SI parameters for a body of the given mass with the reference
    /// collapse strength and nucleon reference mass.
    pub fn si(mass: f64) -> Result<Self> {
        Self::si_with(mass, LAMBDA0_SI, MASS0_SI)
    }

    pub fn si_with(mass: f64, lambda0: f64, mass0: f64) -> Result<Self> {
        Self {
            hbar: HBAR_SI,
            mass,
            lambda: lambda0 * mass / mass0,
            lambda0,
            mass0,
            unit_system: UnitSystem::Si,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let fields = [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("lambda", self.lambda),
            ("lambda0", self.lambda0),
            ("mass0", self.mass0),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(self)
    }

    /// z² = (1 − i)·√(λm/ħ).
    pub fn z2(&self) -> Complex64 {
        Complex64::new(1.0, -1.0) * (self.lambda * self.mass / self.hbar).sqrt()
    }

    /// Principal square root of z², arg z = −π/8.
    pub fn z(&self) -> Complex64 {
        self.z2().sqrt()
    }

    /// ω = 2√(ħλ/m).
    pub fn omega(&self) -> f64 {
        2.0 * (self.hbar * self.lambda / self.mass).sqrt()
    }

    /// Width parameter of the attractor Gaussians, z²/2.
    pub fn alpha_star(&self) -> Complex64 {
        self.z2() * 0.5
    }

    /// Position variance of the attractor Gaussians, (1/2)√(ħ/(λm)).
    pub fn asymptotic_var_q(&self) -> f64 {
        0.5 * (self.hbar / (self.lambda * self.mass)).sqrt()
    }

    pub fn hbar_over_m(&self) -> f64 {
        self.hbar / self.mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_units_derived_constants() {
        let p = PhysicalParams::natural();
        assert_eq!(p.z2(), Complex64::new(1.0, -1.0));
        assert_eq!(p.omega(), 2.0);
        assert!((p.z() * p.z() - p.z2()).norm() < 1e-15);
        assert!((p.z().arg() + std::f64::consts::PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn z2_quadrant_for_any_valid_params() {
        for &(hbar, mass, lambda) in &[(1.0, 1.0, 1.0), (HBAR_SI, 1e-3, 6e21), (2.0, 0.1, 30.0)] {
            let p = PhysicalParams {
                hbar,
                mass,
                lambda,
                ..PhysicalParams::natural()
            };
            assert!(p.z2().re > 0.0 && p.z2().im < 0.0);
            assert!(p.omega() > 0.0);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        let p = PhysicalParams {
            lambda: 0.0,
            ..PhysicalParams::natural()
        };
        assert!(matches!(p.validated(), Err(Error::InvalidParams(_))));
        assert!(PhysicalParams::si(-1.0).is_err());
    }
}
