use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fourier::Fourier;
use super::grid::GridSpec;
use super::params::PhysicalParams;
use crate::error::{Error, Result};

/// Default limit on the probability fraction held by the outer 5% bands.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 1e-8;
/// States with norm² at or below this are treated as zero.
pub const ZERO_NORM: f64 = 1e-30;

/// Complex amplitudes sampled on a uniform periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: GridSpec,
    amplitudes: Vec<Complex64>,
}

/// Quadrature moments of a state. Momentum moments carry units of ħk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub norm2: f64,
    pub q_mean: f64,
    pub q2_mean: f64,
    pub p_mean: f64,
    pub p2_mean: f64,
    pub var_q: f64,
    pub var_p: f64,
}

impl WaveFunction {
    pub fn new(grid: GridSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        let grid = grid.validated()?;
        if amplitudes.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                actual: amplitudes.len(),
            });
        }
        Ok(Self { grid, amplitudes })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let grid = grid.validated()?;
        let amplitudes = grid.positions().into_iter().map(f).collect();
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// Returns the state scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let mut out = self.clone();
        out.normalize()?;
        Ok(out)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if !(n2 > ZERO_NORM) || !n2.is_finite() {
            return Err(Error::ZeroNorm(n2));
        }
        let s = 1.0 / n2.sqrt();
        for a in &mut self.amplitudes {
            *a *= s;
        }
        Ok(())
    }

    /// Hermitian inner product ⟨self|other⟩.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    /// Unconjugated pairing ∫ self(x) other(x) dx.
    pub fn bilinear(&self, other: &WaveFunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &WaveFunction) -> f64 {
        let s: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (s * self.grid.dx()).sqrt()
    }

    /// min over global phases θ of ‖self − e^{iθ} other‖.
    pub fn phase_distance(&self, other: &WaveFunction) -> f64 {
        let ov = other.inner(self).norm();
        let d2 = self.norm_sqr() + other.norm_sqr() - 2.0 * ov;
        d2.max(0.0).sqrt()
    }

    /// Fraction of norm² held by the outer 5% of nodes on each side.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let edge = self.grid.edge_nodes();
        let n = self.amplitudes.len();
        let outer: f64 = self.amplitudes[..edge]
            .iter()
            .chain(&self.amplitudes[n - edge..])
            .map(|a| a.norm_sqr())
            .sum();
        let total: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if total > 0.0 {
            outer / total
        } else {
            0.0
        }
    }

    pub fn check_boundary(&self, tolerance: f64) -> Result<()> {
        let fraction = self.boundary_mass_fraction();
        if fraction > tolerance || !fraction.is_finite() {
            return Err(Error::GridEscape {
                fraction,
                tolerance,
            });
        }
        Ok(())
    }

    /// Transform-space amplitudes (unnormalized forward transform).
    pub fn to_transform(&self, fourier: &mut Fourier) -> Vec<Complex64> {
        let mut data = self.amplitudes.clone();
        fourier.forward(&mut data);
        data
    }

    /// Applies a multiplier in transform space, `F⁻¹[m(k) F[ψ]]`.
    pub fn apply_transform_multiplier(
        &self,
        fourier: &mut Fourier,
        multiplier: impl Fn(f64) -> Complex64,
    ) -> WaveFunction {
        let mut data = self.amplitudes.clone();
        fourier.forward(&mut data);
        for (v, k) in data.iter_mut().zip(self.grid.wavenumbers()) {
            *v *= multiplier(k);
        }
        fourier.inverse(&mut data);
        WaveFunction {
            grid: self.grid,
            amplitudes: data,
        }
    }

    /// p ψ = −iħ ψ' by spectral differentiation.
    pub fn apply_momentum(&self, params: &PhysicalParams) -> WaveFunction {
        let mut fourier = Fourier::new(self.grid.n_points);
        let hbar = params.hbar;
        self.apply_transform_multiplier(&mut fourier, |k| Complex64::new(hbar * k, 0.0))
    }

    /// Translates the state by `shift` (ψ(x) → ψ(x − shift)) using
    /// band-limited interpolation.
    pub fn translated(&self, shift: f64) -> WaveFunction {
        let mut fourier = Fourier::new(self.grid.n_points);
        self.apply_transform_multiplier(&mut fourier, |k| Complex64::from_polar(1.0, -k * shift))
    }

    /// Multiplies by e^{ikx}.
    pub fn boosted(&self, k: f64) -> WaveFunction {
        let mut out = self.clone();
        for (j, a) in out.amplitudes.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, k * self.grid.x(j));
        }
        out
    }

    pub fn observables(&self, params: &PhysicalParams) -> Result<Observables> {
        let mut fourier = Fourier::new(self.grid.n_points);
        self.observables_with(params, &mut fourier)
    }

    pub fn observables_with(
        &self,
        params: &PhysicalParams,
        fourier: &mut Fourier,
    ) -> Result<Observables> {
        let dx = self.grid.dx();
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (j, a) in self.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            let x = self.grid.x(j);
            s0 += w;
            s1 += w * x;
            s2 += w * x * x;
        }
        let norm2 = s0 * dx;
        if !(norm2 > ZERO_NORM) || !norm2.is_finite() {
            return Err(Error::ZeroNorm(norm2));
        }
        let q_mean = s1 / s0;
        let q2_mean = s2 / s0;

        let transform = self.to_transform(fourier);
        let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
        for (v, k) in transform.iter().zip(self.grid.wavenumbers()) {
            let w = v.norm_sqr();
            t0 += w;
            t1 += w * k;
            t2 += w * k * k;
        }
        let p_mean = params.hbar * t1 / t0;
        let p2_mean = params.hbar * params.hbar * t2 / t0;
        Ok(Observables {
            norm2,
            q_mean,
            q2_mean,
            p_mean,
            p2_mean,
            var_q: (q2_mean - q_mean * q_mean).max(0.0),
            var_p: (p2_mean - p_mean * p_mean).max(0.0),
        })
    }

    /// Position mean of the normalized state, skipping the momentum moments.
    pub fn q_mean(&self) -> Result<f64> {
        let (mut s0, mut s1) = (0.0, 0.0);
        for (j, a) in self.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            s0 += w;
            s1 += w * self.grid.x(j);
        }
        if !(s0 * self.grid.dx() > ZERO_NORM) {
            return Err(Error::ZeroNorm(s0 * self.grid.dx()));
        }
        Ok(s1 / s0)
    }

    /// Position mean and variance of the normalized state.
    pub fn q_moments(&self) -> Result<(f64, f64)> {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (j, a) in self.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            let x = self.grid.x(j);
            s0 += w;
            s1 += w * x;
            s2 += w * x * x;
        }
        if !(s0 * self.grid.dx() > ZERO_NORM) {
            return Err(Error::ZeroNorm(s0 * self.grid.dx()));
        }
        let m = s1 / s0;
        Ok((m, (s2 / s0 - m * m).max(0.0)))
    }
}

/// Parameters of `exp[−α(x − x_mean)² + i k_mean x + γ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub alpha: Complex64,
    pub x_mean: f64,
    pub k_mean: f64,
    pub gamma: Complex64,
}

impl GaussianState {
    pub fn new(alpha: Complex64, x_mean: f64, k_mean: f64, gamma: Complex64) -> Self {
        Self {
            alpha,
            x_mean,
            k_mean,
            gamma,
        }
    }

    /// Unit-norm Gaussian with the given width, centre and wavenumber.
    pub fn normalized(alpha: Complex64, x_mean: f64, k_mean: f64) -> Self {
        let re_gamma = -0.25 * (std::f64::consts::PI / (2.0 * alpha.re)).ln();
        Self::new(alpha, x_mean, k_mean, Complex64::new(re_gamma, 0.0))
    }

    /// Unit-norm member of the fixed-spread family with width z²/2.
    pub fn coherent(params: &PhysicalParams, x_mean: f64, k_mean: f64) -> Self {
        Self::normalized(params.alpha_star(), x_mean, k_mean)
    }

    pub fn value(&self, x: f64) -> Complex64 {
        let d = x - self.x_mean;
        (-self.alpha * d * d + Complex64::new(0.0, self.k_mean * x) + self.gamma).exp()
    }

    /// Analytic norm² ∫|φ|² dx.
    pub fn norm_sqr(&self) -> f64 {
        (2.0 * self.gamma.re).exp() * (std::f64::consts::PI / (2.0 * self.alpha.re)).sqrt()
    }

    /// Analytic position variance 1/(4 Re α).
    pub fn var_q(&self) -> f64 {
        0.25 / self.alpha.re
    }

    /// Analytic wavenumber variance |α|²/Re α.
    pub fn var_k(&self) -> f64 {
        self.alpha.norm_sqr() / self.alpha.re
    }
}

/// Samples the Gaussian on the grid. No normalization is applied.
pub fn render_gaussian(g: &GaussianState, grid: &GridSpec) -> Result<WaveFunction> {
    render_gaussian_with_tolerance(g, grid, DEFAULT_BOUNDARY_TOLERANCE)
}

pub fn render_gaussian_with_tolerance(
    g: &GaussianState,
    grid: &GridSpec,
    tolerance: f64,
) -> Result<WaveFunction> {
    if !(g.alpha.re > 0.0) {
        return Err(Error::NonNormalizable(g.alpha.re));
    }
    let psi = WaveFunction::from_fn(*grid, |x| g.value(x))?;
    psi.check_boundary(tolerance)?;
    Ok(psi)
}
