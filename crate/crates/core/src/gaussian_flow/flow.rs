use num_complex::Complex64;

use super::riccati::check_width;
use crate::error::Result;
use crate::qstate::{GaussianState, PhysicalParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// (α, x^m, k^m, γ) packed for the RK4 combinations.
#[derive(Clone, Copy)]
struct MeanVars {
    alpha: Complex64,
    x: f64,
    k: f64,
    gamma: Complex64,
}

impl MeanVars {
    fn axpy(self, h: f64, d: MeanVars) -> MeanVars {
        MeanVars {
            alpha: self.alpha + d.alpha * h,
            x: self.x + d.x * h,
            k: self.k + d.k * h,
            gamma: self.gamma + d.gamma * h,
        }
    }
}

fn mean_rhs(v: MeanVars, params: &PhysicalParams) -> MeanVars {
    let (l, hm) = (params.lambda, params.hbar_over_m());
    let (ar, ai) = (v.alpha.re, v.alpha.im);
    MeanVars {
        alpha: l - 2.0 * I * hm * v.alpha * v.alpha,
        x: hm * v.k - l / ar * v.x,
        k: 2.0 * l * ai / ar * v.x,
        gamma: l * (1.0 - 2.0 * v.alpha / ar) * v.x * v.x - 0.5 * I * hm * v.k * v.k - I * hm * v.alpha,
    }
}

/// One RK4 step of the Gaussian reduction of the damped flow
/// iħ∂φ/∂t = (p²/2m − iħλq²)φ. γ carries the unnormalized amplitude,
/// which decays as exp(−2λ∫⟨q²⟩dt) in ‖φ‖².
pub fn mean_flow_det(g: &GaussianState, dt: f64, params: &PhysicalParams) -> Result<GaussianState> {
    check_width(g.alpha, 0)?;
    let v = MeanVars {
        alpha: g.alpha,
        x: g.x_mean,
        k: g.k_mean,
        gamma: g.gamma,
    };
    let f = |v| mean_rhs(v, params);
    let k1 = f(v);
    let k2 = f(v.axpy(0.5 * dt, k1));
    let k3 = f(v.axpy(0.5 * dt, k2));
    let k4 = f(v.axpy(dt, k3));
    let n = v
        .axpy(dt / 6.0, k1)
        .axpy(dt / 3.0, k2)
        .axpy(dt / 3.0, k3)
        .axpy(dt / 6.0, k4);
    check_width(n.alpha, 0)?;
    Ok(GaussianState::new(n.alpha, n.x, n.k, n.gamma))
}

/// Exponent −αx² + bx + c of the same Gaussian.
#[derive(Clone, Copy)]
struct Quadratic {
    alpha: Complex64,
    b: Complex64,
    c: Complex64,
}

impl Quadratic {
    fn from_state(g: &GaussianState) -> Self {
        Self {
            alpha: g.alpha,
            b: 2.0 * g.alpha * g.x_mean + I * g.k_mean,
            c: g.gamma - g.alpha * g.x_mean * g.x_mean,
        }
    }

    fn to_state(self) -> GaussianState {
        let x = self.b.re / (2.0 * self.alpha.re);
        let k = self.b.im - 2.0 * self.alpha.im * x;
        GaussianState::new(self.alpha, x, k, self.c + self.alpha * x * x)
    }

    fn axpy(self, h: f64, d: Quadratic) -> Quadratic {
        Quadratic {
            alpha: self.alpha + d.alpha * h,
            b: self.b + d.b * h,
            c: self.c + d.c * h,
        }
    }

    fn drift(self, params: &PhysicalParams) -> Quadratic {
        let hm = params.hbar_over_m();
        Quadratic {
            alpha: params.lambda - 2.0 * I * hm * self.alpha * self.alpha,
            b: -2.0 * I * hm * self.alpha * self.b,
            c: 0.5 * I * hm * (self.b * self.b - 2.0 * self.alpha),
        }
    }

    fn rk4(self, h: f64, params: &PhysicalParams) -> Quadratic {
        let k1 = self.drift(params);
        let k2 = self.axpy(0.5 * h, k1).drift(params);
        let k3 = self.axpy(0.5 * h, k2).drift(params);
        let k4 = self.axpy(h, k3).drift(params);
        self.axpy(h / 6.0, k1)
            .axpy(h / 3.0, k2)
            .axpy(h / 3.0, k3)
            .axpy(h / 6.0, k4)
    }
}

/// One step of the Gaussian reduction of the linear equation driven by ξ.
///
/// Writing φ = exp(−αx² + bx + c), the linear equation closes on
///   dα = (λ − 2iħα²/m) dt,
///   db = −(2iħ/m) α b dt + √λ dξ,
///   dc = (iħ/2m)(b² − 2α) dt,
/// with no Itô correction since the noise enters b additively. The drift
/// is advanced by RK4 over two half steps around the noise kick.
pub fn mean_flow_stoch(
    g: &GaussianState,
    dxi: f64,
    dt: f64,
    params: &PhysicalParams,
) -> Result<GaussianState> {
    check_width(g.alpha, 0)?;
    let mut q = Quadratic::from_state(g).rk4(0.5 * dt, params);
    q.b += params.lambda.sqrt() * dxi;
    let q = q.rk4(0.5 * dt, params);
    check_width(q.alpha, 0)?;
    Ok(q.to_state())
}
