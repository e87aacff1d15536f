use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qstate::{GaussianState, PhysicalParams, WaveFunction};

/// Gradient tolerance on the squared distance at the reported optimum.
pub const GRADIENT_TOLERANCE: f64 = 1e-9;

/// Closest member of the fixed-spread coherent family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub x_mean: f64,
    pub k_mean: f64,
    /// min over (a, b, phase) of ‖ψ − ψ^G_{a,b}‖ for unit ψ.
    pub distance: f64,
    /// |⟨ψ^G|ψ⟩| at the optimum.
    pub overlap: f64,
    pub converged: bool,
}

/// Overlap O(a,b) = ⟨G_{a,b}|ψ⟩ and its partial derivatives.
struct OverlapKernel<'a> {
    psi: &'a WaveFunction,
    alpha: Complex64,
    log_norm: f64,
}

impl OverlapKernel<'_> {
    fn eval(&self, a: f64, b: f64) -> (Complex64, Complex64, Complex64) {
        let grid = self.psi.grid();
        let dx = grid.dx();
        let ac = self.alpha.conj();
        let mut o = Complex64::new(0.0, 0.0);
        let mut oa = Complex64::new(0.0, 0.0);
        let mut ob = Complex64::new(0.0, 0.0);
        for (j, v) in self.psi.amplitudes().iter().enumerate() {
            let x = grid.x(j);
            let d = x - a;
            // conj(G) = exp(−conj(α) d² − i b x + log_norm)
            let g = (-ac * d * d + Complex64::new(self.log_norm, -b * x)).exp();
            let term = g * v;
            o += term;
            oa += term * (ac * (2.0 * d));
            ob += term * Complex64::new(0.0, -x);
        }
        (o * dx, oa * dx, ob * dx)
    }

    /// Squared distance 2 − 2|O| and its gradient.
    fn objective(&self, a: f64, b: f64) -> (f64, [f64; 2]) {
        let (o, oa, ob) = self.eval(a, b);
        let m = o.norm();
        if m == 0.0 {
            return (2.0, [0.0, 0.0]);
        }
        let ga = (o.conj() * oa).re / m;
        let gb = (o.conj() * ob).re / m;
        (2.0 - 2.0 * m, [-2.0 * ga, -2.0 * gb])
    }
}

/// Nelder–Mead on a 2D function.
fn nelder_mead(
    f: impl Fn(f64, f64) -> f64,
    start: [f64; 2],
    steps: [f64; 2],
    xtol: f64,
    max_iter: usize,
) -> [f64; 2] {
    let mut simplex = [
        start,
        [start[0] + steps[0], start[1]],
        [start[0], start[1] + steps[1]],
    ];
    let mut values = simplex.map(|p| f(p[0], p[1]));
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let size = simplex[1..]
            .iter()
            .map(|p| ((p[0] - simplex[0][0]) / steps[0]).abs().max(((p[1] - simplex[0][1]) / steps[1]).abs()))
            .fold(0.0, f64::max);
        if size < xtol {
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected[0], reflected[1]);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded[0], expanded[1]);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted[0], contracted[1]);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        0.5 * (simplex[0][0] + simplex[i][0]),
                        0.5 * (simplex[0][1] + simplex[i][1]),
                    ];
                    values[i] = f(simplex[i][0], simplex[i][1]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    simplex[best]
}

/// Distance from a state to the Gaussian manifold of width z²/2.
///
/// Starts from the state's first moments, runs a Nelder–Mead search over
/// the centre `a` and wavenumber `b`, then polishes with Newton steps on
/// the analytic gradient. The global phase is eliminated in closed form.
pub fn gaussian_distance(psi: &WaveFunction, params: &PhysicalParams) -> Result<GaussianFit> {
    let unit = psi.normalized()?;
    let obs = unit.observables(params)?;
    let template = GaussianState::coherent(params, 0.0, 0.0);
    let kernel = OverlapKernel {
        psi: &unit,
        alpha: template.alpha,
        log_norm: template.gamma.re,
    };

    let start = [obs.q_mean, obs.p_mean / params.hbar];
    let steps = [
        0.5 * obs.var_q.sqrt().max(1e-3),
        0.5 * (obs.var_p.sqrt() / params.hbar).max(1e-3),
    ];
    let [mut a, mut b] = nelder_mead(|a, b| kernel.objective(a, b).0, start, steps, 1e-9, 400);

    let (mut value, mut grad) = kernel.objective(a, b);
    for _ in 0..8 {
        if grad[0].hypot(grad[1]) < 0.1 * GRADIENT_TOLERANCE {
            break;
        }
        // Finite-difference Hessian of the analytic gradient.
        let h = [1e-5 * steps[0], 1e-5 * steps[1]];
        let (_, ga_p) = kernel.objective(a + h[0], b);
        let (_, ga_m) = kernel.objective(a - h[0], b);
        let (_, gb_p) = kernel.objective(a, b + h[1]);
        let (_, gb_m) = kernel.objective(a, b - h[1]);
        let haa = (ga_p[0] - ga_m[0]) / (2.0 * h[0]);
        let hab = 0.5 * ((ga_p[1] - ga_m[1]) / (2.0 * h[0]) + (gb_p[0] - gb_m[0]) / (2.0 * h[1]));
        let hbb = (gb_p[1] - gb_m[1]) / (2.0 * h[1]);
        let det = haa * hbb - hab * hab;
        if !(det > 0.0 && haa > 0.0) {
            break;
        }
        let da = -(hbb * grad[0] - hab * grad[1]) / det;
        let db = -(haa * grad[1] - hab * grad[0]) / det;
        let (nv, ng) = kernel.objective(a + da, b + db);
        // Near the optimum the value is flat to rounding; the gradient is not.
        if nv > value + 1e-15 && ng[0].hypot(ng[1]) >= grad[0].hypot(grad[1]) {
            break;
        }
        a += da;
        b += db;
        value = nv;
        grad = ng;
    }

    let overlap = 1.0 - 0.5 * value;
    Ok(GaussianFit {
        x_mean: a,
        k_mean: b,
        distance: value.max(0.0).sqrt(),
        overlap,
        converged: grad[0].hypot(grad[1]) < GRADIENT_TOLERANCE,
    })
}

/// Distance of a centred Gaussian of width `alpha` to the fixed-spread
/// family, in closed form: the optimum shares its centre and wavenumber.
pub fn gaussian_width_distance(alpha: Complex64, params: &PhysicalParams) -> f64 {
    let beta = params.alpha_star();
    let overlap = (2.0 * (alpha.re * beta.re).sqrt() / (alpha + beta.conj()).norm()).sqrt();
    (2.0 - 2.0 * overlap).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{render_gaussian, GridSpec};

    #[test]
    fn coherent_member_has_zero_distance() {
        let p = PhysicalParams::natural();
        let grid = GridSpec::symmetric(12.0, 256).unwrap();
        let psi = render_gaussian(&GaussianState::coherent(&p, 1.0, 2.0), &grid).unwrap();
        let fit = gaussian_distance(&psi, &p).unwrap();
        assert!(fit.distance < 1e-8, "{fit:?}");
        assert!((fit.x_mean - 1.0).abs() < 1e-6 && (fit.k_mean - 2.0).abs() < 1e-6);
    }

    #[test]
    fn phase_invariance_and_explicit_distance() {
        let p = PhysicalParams::natural();
        let grid = GridSpec::symmetric(12.0, 256).unwrap();
        // two Gaussians of the right width: far from the manifold
        let g1 = GaussianState::coherent(&p, -1.5, 0.5);
        let g2 = GaussianState::coherent(&p, 1.0, -0.3);
        let psi = WaveFunction::from_fn(grid, |x| g1.value(x) + 0.6 * g2.value(x))
            .unwrap()
            .normalized()
            .unwrap();
        let fit = gaussian_distance(&psi, &p).unwrap();
        let mut rotated = psi.clone();
        rotated.scale(Complex64::from_polar(1.0, 2.1));
        let fit_r = gaussian_distance(&rotated, &p).unwrap();
        assert!((fit.distance - fit_r.distance).abs() < 1e-10);

        let best = render_gaussian(&GaussianState::coherent(&p, fit.x_mean, fit.k_mean), &grid).unwrap();
        let explicit = psi.phase_distance(&best);
        assert!((explicit.powi(2) - 2.0 * (1.0 - fit.overlap)).abs() < 1e-10);
        assert!(fit.converged);
    }

    #[test]
    fn wrong_width_closed_form_matches_search() {
        let p = PhysicalParams::natural();
        let grid = GridSpec::symmetric(12.0, 256).unwrap();
        let alpha = Complex64::new(1.0, 0.0);
        let psi = render_gaussian(&GaussianState::normalized(alpha, 0.0, 0.0), &grid).unwrap();
        let fit = gaussian_distance(&psi, &p).unwrap();
        assert!((fit.distance - gaussian_width_distance(alpha, &p)).abs() < 1e-9);
        assert!(gaussian_width_distance(p.alpha_star(), &p) < 1e-8);
    }
}
