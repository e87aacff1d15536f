use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::qstate::{Fourier, GridSpec, PhysicalParams, WaveFunction};

/// Highest supported mode index.
pub const MAX_MODE: usize = 60;
pub const DEFAULT_N_MAX: usize = 40;
const RESCALE_ABOVE: f64 = 1e100;

/// Normalized Hermite functions h_0..=h_{n_max} at a complex argument,
/// h_n(w) = (2ⁿ n! √π)^{-1/2} H_n(w) e^{−w²/2}.
///
/// The upward recurrence runs on a mantissa with a separate complex log
/// scale so that neither the Gaussian factor nor the polynomial growth
/// overflows.
pub fn hermite_functions(n_max: usize, w: Complex64) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * w * w;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(std::f64::consts::PI.powf(-0.25), 0.0);
    out.push(cur * log_scale.exp());
    for n in 0..n_max {
        let nf = n as f64;
        let next = w * cur * (2.0 / (nf + 1.0)).sqrt() - prev * (nf / (nf + 1.0)).sqrt();
        prev = cur;
        cur = next;
        let size = cur.norm();
        if !size.is_finite() {
            return Err(Error::RecurrenceOverflow(n + 1));
        }
        if size > RESCALE_ABOVE {
            prev /= size;
            cur /= size;
            log_scale += size.ln();
        }
        out.push(cur * log_scale.exp());
    }
    Ok(out)
}

type Cdd = Complex<TwoFloat>;

fn dd(v: f64) -> TwoFloat {
    TwoFloat::from(v)
}

/// Power-of-two rescaling keeps the double-double mantissa exact.
const RESCALE_EXP: i32 = 300;

/// u_0..=u_{n_max} at one point, u_n(x) = √z h_n(zx).
///
/// The modes are exponentially large where they oscillate, so their
/// unit bilinear norm comes from heavy cancellation. Writing zx = ζy with
/// ζ = (1 − i)^{1/2} and y = s^{1/2}x, s = √(λm/ħ), the argument, the
/// recurrence and the exponent −(1 − i)y²/2 are carried in double-double;
/// each transcendental is evaluated at an exact double with a first-order
/// correction for the low word. Stored values are then accurate to about
/// one rounding each.
fn mode_values(n_max: usize, params: &PhysicalParams, x: f64) -> Result<Vec<Complex64>> {
    let s = (params.lambda * params.mass / params.hbar).sqrt();
    let y = dd(s).sqrt() * x;
    let r2 = dd(2.0).sqrt();
    let zeta = Cdd::new(((r2 + 1.0) / 2.0).sqrt(), -((r2 - 1.0) / 2.0).sqrt());
    let w = Cdd::new(zeta.re * y, zeta.im * y);

    let y2 = y * y;
    let re_exp = -(y2 / 2.0);
    let phase = y2 / 2.0;
    let magnitude = re_exp.hi().exp() * (1.0 + re_exp.lo());
    let (sin_h, cos_h) = phase.hi().sin_cos();
    let cis = Complex64::new(cos_h - phase.lo() * sin_h, sin_h + phase.lo() * cos_h);
    let prefactor = params.z().sqrt() * cis * magnitude;

    let mut out = Vec::with_capacity(n_max + 1);
    let zero = Cdd::new(dd(0.0), dd(0.0));
    let mut prev = zero;
    let mut cur = Cdd::new(dd(std::f64::consts::PI).sqrt().sqrt().recip(), dd(0.0));
    let mut exponent = 0i32;
    let emit = |c: &Cdd, e: i32| prefactor * Complex64::new(c.re.hi(), c.im.hi()) * 2f64.powi(e);
    out.push(emit(&cur, exponent));
    for n in 0..n_max {
        let c1 = (dd(2.0) / (n as f64 + 1.0)).sqrt();
        let c2 = (dd(n as f64) / (n as f64 + 1.0)).sqrt();
        let wc = w * cur;
        let next = Cdd::new(wc.re * c1 - prev.re * c2, wc.im * c1 - prev.im * c2);
        prev = cur;
        cur = next;
        let size = cur.re.hi().abs().max(cur.im.hi().abs());
        if !size.is_finite() {
            return Err(Error::RecurrenceOverflow(n + 1));
        }
        if size > 2f64.powi(RESCALE_EXP) {
            let f = 2f64.powi(-RESCALE_EXP);
            prev = Cdd::new(prev.re * f, prev.im * f);
            cur = Cdd::new(cur.re * f, cur.im * f);
            exponent += RESCALE_EXP;
        }
        out.push(emit(&cur, exponent));
    }
    Ok(out)
}

/// λ_n = (1 − i)/2 · ħω(n + 1/2).
pub fn mode_eigenvalue(n: usize, params: &PhysicalParams) -> Complex64 {
    Complex64::new(0.5, -0.5) * params.hbar * params.omega() * (n as f64 + 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsaMode {
    pub n: usize,
    pub eigenvalue: Complex64,
    pub profile: WaveFunction,
}

/// u_0..=u_{n_max} sampled on one grid, u_n(x) = √z h_n(zx).
#[derive(Debug, Clone)]
pub struct ModeTable {
    params: PhysicalParams,
    grid: GridSpec,
    modes: Vec<Vec<Complex64>>,
}

impl ModeTable {
    pub fn new(n_max: usize, params: &PhysicalParams, grid: &GridSpec) -> Result<Self> {
        if n_max > MAX_MODE {
            return Err(Error::RecurrenceOverflow(n_max));
        }
        let grid = grid.validated()?;
        let mut modes = vec![Vec::with_capacity(grid.n_points); n_max + 1];
        for j in 0..grid.n_points {
            for (m, v) in modes.iter_mut().zip(mode_values(n_max, params, grid.x(j))?) {
                m.push(v);
            }
        }
        Ok(Self {
            params: *params,
            grid,
            modes,
        })
    }

    pub fn n_max(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn profile(&self, n: usize) -> &[Complex64] {
        &self.modes[n]
    }

    pub fn mode(&self, n: usize) -> Result<NsaMode> {
        let values = self
            .modes
            .get(n)
            .ok_or(Error::RecurrenceOverflow(n))?
            .clone();
        Ok(NsaMode {
            n,
            eigenvalue: mode_eigenvalue(n, &self.params),
            profile: WaveFunction::new(self.grid, values)?,
        })
    }

    /// ∫u_n u_m dx on the grid.
    pub fn pairing(&self, n: usize, m: usize) -> Complex64 {
        bilinear(&self.modes[n], &self.modes[m]) * self.grid.dx()
    }

    /// Σ c_n u_n.
    pub fn reconstruct(&self, coefficients: &[Complex64]) -> Result<WaveFunction> {
        if coefficients.len() > self.modes.len() {
            return Err(Error::LengthMismatch {
                expected: self.modes.len(),
                actual: coefficients.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.n_points];
        for (c, mode) in coefficients.iter().zip(&self.modes) {
            for (o, u) in out.iter_mut().zip(mode) {
                *o += c * u;
            }
        }
        WaveFunction::new(self.grid, out)
    }
}

fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Single eigenmode u_n rendered on `grid`.
pub fn eigenmode(n: usize, params: &PhysicalParams, grid: &GridSpec) -> Result<NsaMode> {
    if n > MAX_MODE {
        return Err(Error::RecurrenceOverflow(n));
    }
    ModeTable::new(n, params, grid)?.mode(n)
}

/// H ψ = p²ψ/2m − iħλq²ψ with p applied spectrally.
pub fn apply_nsa_hamiltonian(psi: &WaveFunction, params: &PhysicalParams) -> WaveFunction {
    let grid = *psi.grid();
    let mut fourier = Fourier::new(grid.n_points);
    let c = params.hbar * params.hbar / (2.0 * params.mass);
    let mut out = psi.apply_transform_multiplier(&mut fourier, |k| Complex64::new(c * k * k, 0.0));
    let damp = Complex64::new(0.0, -params.hbar * params.lambda);
    for (j, (o, v)) in out.amplitudes_mut().iter_mut().zip(psi.amplitudes()).enumerate() {
        let x = grid.x(j);
        *o += damp * x * x * v;
    }
    out
}

/// ‖H u_n − λ_n u_n‖ / ‖u_n‖.
pub fn spectral_residual(mode: &NsaMode, params: &PhysicalParams) -> f64 {
    let h = apply_nsa_hamiltonian(&mode.profile, params);
    let mut diff = mode.profile.clone();
    diff.scale(-mode.eigenvalue);
    let num: f64 = h
        .amplitudes()
        .iter()
        .zip(diff.amplitudes())
        .map(|(a, b)| (a + b).norm_sqr())
        .sum::<f64>()
        * mode.profile.grid().dx();
    num.sqrt() / mode.profile.norm()
}
