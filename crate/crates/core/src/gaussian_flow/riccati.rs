use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::PhysicalParams;

/// dα/dt = λ − (2iħ/m)α².
pub fn riccati_rhs(alpha: Complex64, params: &PhysicalParams) -> Complex64 {
    Complex64::new(params.lambda, 0.0) - Complex64::new(0.0, 2.0 * params.hbar_over_m()) * alpha * alpha
}

/// One classical RK4 step of the width equation.
pub fn riccati_step(alpha: Complex64, dt: f64, params: &PhysicalParams) -> Complex64 {
    let f = |a| riccati_rhs(a, params);
    let k1 = f(alpha);
    let k2 = f(alpha + k1 * (0.5 * dt));
    let k3 = f(alpha + k2 * (0.5 * dt));
    let k4 = f(alpha + k3 * dt);
    alpha + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0)
}

pub(crate) fn check_width(alpha: Complex64, index: usize) -> Result<()> {
    if alpha.re > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::BlowUp(index))
    }
}

/// Largest stable-ish product of step and local rate 4ħ|α|/m.
const MAX_STIFF_STEP: f64 = 0.5;

/// α on every point of `t_grid`. Each interval is split into equal RK4
/// substeps so that the local rate 4ħ|α|/m times the substep stays small.
pub fn riccati_solve(alpha0: Complex64, t_grid: &[f64], params: &PhysicalParams) -> Result<Vec<Complex64>> {
    if !(alpha0.re > 0.0) {
        return Err(Error::NonNormalizable(alpha0.re));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    let mut alpha = alpha0;
    for (j, w) in t_grid.windows(2).enumerate() {
        out.push(alpha);
        let h = w[1] - w[0];
        let rate = 4.0 * params.hbar_over_m() * alpha.norm() + params.omega();
        let n_sub = ((rate * h.abs() / MAX_STIFF_STEP).ceil() as usize).max(1);
        for _ in 0..n_sub {
            alpha = riccati_step(alpha, h / n_sub as f64, params);
        }
        check_width(alpha, j + 1)?;
    }
    if !t_grid.is_empty() {
        out.push(alpha);
    }
    Ok(out)
}

/// Uniform grid 0, dt, …, n·dt.
pub fn uniform_times(dt: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|j| j as f64 * dt).collect()
}

/// Least-squares slope of ln|α_t − z²/2| over the window [t0, t1].
pub fn riccati_decay_rate(
    alpha0: Complex64,
    dt: f64,
    t0: f64,
    t1: f64,
    params: &PhysicalParams,
) -> Result<f64> {
    let n = (t1 / dt).round() as usize;
    let times = uniform_times(dt, n);
    let series = riccati_solve(alpha0, &times, params)?;
    let target = params.alpha_star();
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&series)
        .filter(|(t, _)| **t >= t0)
        .map(|(&t, a)| (t, (a - target).norm().ln()))
        .collect();
    let m = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (tm, ym) = (st / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - tm) * (y - ym), b + (t - tm).powi(2)));
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_is_stationary() {
        let p = PhysicalParams::natural();
        let a = p.alpha_star();
        assert!(riccati_rhs(a, &p).norm() < 1e-15);
        let series = riccati_solve(a, &uniform_times(1e-2, 100), &p).unwrap();
        assert!(series.iter().all(|s| (s - a).norm() < 1e-14));
    }

    #[test]
    fn converges_from_narrow_and_wide_starts() {
        let p = PhysicalParams::natural();
        let times = uniform_times(1e-4, 120_000);
        for a0 in [2.0, 0.01] {
            let s = riccati_solve(Complex64::new(a0, 0.0), &times, &p).unwrap();
            assert!((s.last().unwrap() - p.alpha_star()).norm() < 1e-8, "{a0}");
        }
    }

    #[test]
    fn rejects_non_normalizable_start() {
        let p = PhysicalParams::natural();
        assert!(riccati_solve(Complex64::new(-1.0, 0.0), &[0.0, 1.0], &p).is_err());
    }
}
