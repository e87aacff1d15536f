use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{Fourier, GridSpec, PhysicalParams, WaveFunction, DEFAULT_BOUNDARY_TOLERANCE};

/// Accuracy guard on λ·x_max²·dt.
pub const MAX_STEP_EXPONENT: f64 = 0.1;
/// Increments larger than this many √dt are treated as corrupted input.
pub const MAX_INCREMENT_SIGMAS: f64 = 10.0;

/// Strang split-step integrator: half kinetic step in transform space, exact
/// multiplicative step in real space, half kinetic step.
///
/// Holds the transform plans and precomputed kinetic factors for one
/// (grid, params, dt) triple.
#[derive(Debug, Clone)]
pub struct SplitStepper {
    grid: GridSpec,
    params: PhysicalParams,
    dt: f64,
    fourier: Fourier,
    half_kinetic: Vec<Complex64>,
    x: Vec<f64>,
    boundary_tolerance: f64,
}

impl SplitStepper {
    /// Errors with `StepTooLarge` if λ·x_max²·dt > 0.1.
    pub fn new(grid: GridSpec, params: PhysicalParams, dt: f64) -> Result<Self> {
        let exponent = params.lambda * grid.x_abs_max().powi(2) * dt;
        if exponent > MAX_STEP_EXPONENT {
            return Err(Error::StepTooLarge(exponent));
        }
        Self::unguarded(grid, params, dt)
    }

    /// Same integrator without the λ·x_max²·dt guard; used for the
    /// deterministic damped flow where the multiplicative factor is
    /// a pure decay.
    pub fn unguarded(grid: GridSpec, params: PhysicalParams, dt: f64) -> Result<Self> {
        let grid = grid.validated()?;
        let params = params.validated()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::ConfigInvalid(format!("dt must be positive, got {dt}")));
        }
        let n = grid.n_points;
        let inv_n = 1.0 / n as f64;
        let c = params.hbar * dt / (4.0 * params.mass);
        let half_kinetic = grid
            .wavenumbers()
            .into_iter()
            .map(|k| Complex64::from_polar(inv_n, -c * k * k))
            .collect();
        Ok(Self {
            fourier: Fourier::new(n),
            x: grid.positions(),
            grid,
            params,
            dt,
            half_kinetic,
            boundary_tolerance: DEFAULT_BOUNDARY_TOLERANCE,
        })
    }

    pub fn with_boundary_tolerance(mut self, tolerance: f64) -> Self {
        self.boundary_tolerance = tolerance;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn boundary_tolerance(&self) -> f64 {
        self.boundary_tolerance
    }

    pub fn fourier(&mut self) -> &mut Fourier {
        &mut self.fourier
    }

    fn check_increment(&self, d: f64) -> Result<()> {
        let limit = MAX_INCREMENT_SIGMAS * self.dt.sqrt();
        if !(d.abs() <= limit) {
            return Err(Error::IncrementOutOfRange {
                increment: d,
                limit,
            });
        }
        Ok(())
    }

    fn check_grid(&self, psi: &WaveFunction) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::InvalidGrid(
                "state grid differs from the integrator grid".into(),
            ));
        }
        Ok(())
    }

    fn half_kinetic(&mut self, amps: &mut [Complex64]) {
        self.fourier.forward(amps);
        for (a, f) in amps.iter_mut().zip(&self.half_kinetic) {
            *a *= f;
        }
        self.fourier.inverse_unscaled(amps);
    }

    fn strang(&mut self, psi: &mut WaveFunction, exponent: impl Fn(f64) -> f64) {
        let amps = psi.amplitudes_mut();
        self.half_kinetic(amps);
        for (a, &x) in amps.iter_mut().zip(&self.x) {
            *a *= exponent(x).exp();
        }
        self.half_kinetic(amps);
    }

    /// One step of the linear equation driven by ξ. The multiplicative
    /// factor is exp(√λ q dξ − λ q² dt); the norm is left as is.
    pub fn step_linear(&mut self, psi: &mut WaveFunction, dxi: f64) -> Result<()> {
        self.check_grid(psi)?;
        self.check_increment(dxi)?;
        let a = self.params.lambda.sqrt() * dxi;
        let b = self.params.lambda * self.dt;
        self.strang(psi, |x| a * x - b * x * x);
        psi.check_boundary(self.boundary_tolerance)
    }

    /// One step of the norm-preserving collapse equation driven by W.
    /// ⟨q⟩ is frozen at the start of the step; the state is renormalized.
    pub fn step_nonlinear(&mut self, psi: &mut WaveFunction, dw: f64) -> Result<()> {
        self.step_nonlinear_in_frame(psi, dw, 0.0)
    }

    /// Nonlinear step for a state stored in a frame moving at `drift`
    /// (position units per step); the frozen mean is taken where the
    /// frame sits when the multiplier acts, half a step later.
    pub(crate) fn step_nonlinear_in_frame(&mut self, psi: &mut WaveFunction, dw: f64, drift: f64) -> Result<()> {
        self.check_grid(psi)?;
        self.check_increment(dw)?;
        let m = psi.q_mean()? - 0.5 * drift;
        let a = self.params.lambda.sqrt() * dw;
        let b = self.params.lambda * self.dt;
        self.strang(psi, |x| {
            let y = x - m;
            a * y - b * y * y
        });
        psi.normalize()?;
        psi.check_boundary(self.boundary_tolerance)
    }

    /// One step of the damped flow i ħ ∂φ/∂t = (p²/2m − iħλq²) φ, with the
    /// result renormalized.
    pub fn step_damped(&mut self, psi: &mut WaveFunction) -> Result<()> {
        self.check_grid(psi)?;
        let b = self.params.lambda * self.dt;
        self.strang(psi, |x| -b * x * x);
        psi.normalize()?;
        psi.check_boundary(self.boundary_tolerance)
    }
}

/// Single linear step. See [`SplitStepper::step_linear`].
pub fn step_linear(
    phi: &WaveFunction,
    dxi: f64,
    dt: f64,
    params: &PhysicalParams,
) -> Result<WaveFunction> {
    let mut stepper = SplitStepper::new(*phi.grid(), *params, dt)?;
    let mut out = phi.clone();
    stepper.step_linear(&mut out, dxi)?;
    Ok(out)
}

/// Single nonlinear step. See [`SplitStepper::step_nonlinear`].
pub fn step_nonlinear(
    psi: &WaveFunction,
    dw: f64,
    dt: f64,
    params: &PhysicalParams,
) -> Result<WaveFunction> {
    let mut stepper = SplitStepper::new(*psi.grid(), *params, dt)?;
    let mut out = psi.clone();
    stepper.step_nonlinear(&mut out, dw)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{render_gaussian, GaussianState};

    fn natural_zero_lambda() -> PhysicalParams {
        // λ = 0 is outside the validated domain; use a vanishing value.
        PhysicalParams {
            lambda: 1e-300,
            ..PhysicalParams::natural()
        }
    }

    #[test]
    fn free_spreading_matches_analytic_width() {
        // Free Gaussian exp(−x²/(4σ²)): σ²(t) = σ²(1 + (ħt/(2mσ²))²).
        let p = natural_zero_lambda();
        let grid = GridSpec::symmetric(20.0, 512).unwrap();
        let psi0 = render_gaussian(&GaussianState::normalized(Complex64::new(0.5, 0.0), 0.0, 0.0), &grid)
            .unwrap();
        let dt = 1e-2;
        let mut stepper = SplitStepper::new(grid, p, dt).unwrap();
        let mut psi = psi0.clone();
        for _ in 0..100 {
            stepper.step_linear(&mut psi, 0.0).unwrap();
        }
        let t: f64 = 1.0;
        let s2 = 0.5;
        let expected = s2 * (1.0 + (t / (2.0 * s2)).powi(2));
        let var = psi.observables(&p).unwrap().var_q;
        assert!((var - expected).abs() < 1e-6, "{var} vs {expected}");
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);

        let mut psi_nl = psi0;
        for _ in 0..100 {
            stepper.step_nonlinear(&mut psi_nl, 0.0).unwrap();
        }
        assert!((psi_nl.norm_sqr() - 1.0).abs() < 1e-14);
        assert!(psi_nl.distance(&psi) < 1e-10);
    }

    #[test]
    fn parity_preserved_without_noise() {
        let p = PhysicalParams::natural();
        let grid = GridSpec::symmetric(8.0, 128).unwrap();
        let g = GaussianState::normalized(Complex64::new(1.0, 0.3), 0.0, 0.0);
        let mut psi = render_gaussian(&g, &grid).unwrap();
        let mut stepper = SplitStepper::new(grid, p, 1e-3).unwrap();
        for _ in 0..200 {
            stepper.step_linear(&mut psi, 0.0).unwrap();
        }
        assert!(psi.q_mean().unwrap().abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let p = PhysicalParams::natural();
        let grid = GridSpec::symmetric(10.0, 128).unwrap();
        assert!(matches!(SplitStepper::new(grid, p, 2e-3), Err(Error::StepTooLarge(_))));
        let mut s = SplitStepper::new(grid, p, 1e-4).unwrap();
        let mut psi = render_gaussian(&GaussianState::normalized(Complex64::new(0.5, 0.0), 0.0, 0.0), &grid)
            .unwrap();
        assert!(matches!(
            s.step_linear(&mut psi, 0.2),
            Err(Error::IncrementOutOfRange { .. })
        ));
        assert!(s.step_linear(&mut psi, 0.05).is_ok());
    }

    #[test]
    fn nonlinear_keeps_unit_norm_per_step() {
        let p = PhysicalParams::natural();
        let grid = GridSpec::symmetric(8.0, 128).unwrap();
        let mut psi = render_gaussian(&GaussianState::normalized(Complex64::new(0.8, 0.0), 0.5, 0.0), &grid)
            .unwrap();
        let mut s = SplitStepper::new(grid, p, 1e-3).unwrap();
        let path = crate::sde::NoisePath::generate(3, 0, 1e-3, 500, crate::sde::NoiseKind::WMeasureP);
        for &dw in &path.increments {
            s.step_nonlinear(&mut psi, dw).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}
