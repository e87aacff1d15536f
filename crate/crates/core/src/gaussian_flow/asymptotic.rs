use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::PhysicalParams;
use crate::record::TrajectoryRecord;
use crate::sde::{NoiseKind, NoisePath};

/// Minimum ωt a trajectory must cover for [`fit_long_time`].
pub const MIN_FIT_SPAN: f64 = 10.0;

/// Random constants of the long-time motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLaw {
    pub x: f64,
    pub k: f64,
    pub omega: f64,
}

impl AsymptoticLaw {
    pub fn new(x: f64, k: f64, params: &PhysicalParams) -> Self {
        Self {
            x,
            k,
            omega: params.omega(),
        }
    }
}

/// Brownian parts of the long-time motion at path nodes 0..=n:
/// (√λ(ħ/m)∫W ds + √(ħ/m)W, √λ W).
fn brownian_terms(path: &NoisePath, params: &PhysicalParams) -> (Vec<f64>, Vec<f64>) {
    let w = path.cumulative();
    let hm = params.hbar_over_m();
    let sl = params.lambda.sqrt();
    let mut integral = 0.0;
    let mut xs = Vec::with_capacity(w.len());
    for j in 0..w.len() {
        if j > 0 {
            integral += 0.5 * (w[j - 1] + w[j]) * path.dt;
        }
        xs.push(sl * hm * integral + hm.sqrt() * w[j]);
    }
    let ks = w.iter().map(|v| sl * v).collect();
    (xs, ks)
}

fn require_w(path: &NoisePath) -> Result<()> {
    if path.kind != NoiseKind::WMeasureP {
        return Err(Error::ConfigInvalid(
            "asymptotic motion is driven by a W-kind path".into(),
        ));
    }
    Ok(())
}

/// x̄_t = X + (ħ/m)K t + √λ(ħ/m)∫₀ᵗW ds + √(ħ/m)W_t and k̄_t = K + √λ W_t
/// at t = j·dt, j = 0..=n, with ∫W by the trapezoid rule.
pub fn asymptotic_paths(
    law: &AsymptoticLaw,
    path: &NoisePath,
    params: &PhysicalParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    require_w(path)?;
    let (bx, bk) = brownian_terms(path, params);
    let hm = params.hbar_over_m();
    let xs = bx
        .iter()
        .enumerate()
        .map(|(j, b)| law.x + hm * law.k * j as f64 * path.dt + b)
        .collect();
    let ks = bk.iter().map(|b| law.k + b).collect();
    Ok((xs, ks))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongTimeFit {
    pub law: AsymptoticLaw,
    /// RMS of the fit residual over the fit window.
    pub residual_norm: f64,
    pub times: Vec<f64>,
    /// ⟨q⟩ − x̄ and ⟨k⟩ − k̄ at every record time, using the fitted X, K.
    pub q_residuals: Vec<f64>,
    pub k_residuals: Vec<f64>,
    pub window_start: f64,
}

/// Recovers X and K from a collapsed trajectory and the W path that drove it.
///
/// The Brownian terms are subtracted and X, K found by least squares over
/// the second half of the record (and ωt ≥ 5), with one exp(−ωt/2)
/// regressor per series to absorb the decaying transient.
pub fn fit_long_time(
    record: &TrajectoryRecord,
    path: &NoisePath,
    params: &PhysicalParams,
) -> Result<LongTimeFit> {
    require_w(path)?;
    record.check_columns()?;
    let omega = params.omega();
    let span = record.times.last().copied().unwrap_or(0.0) * omega;
    if !(span >= MIN_FIT_SPAN - 1e-9) {
        return Err(Error::InsufficientSpan {
            available: span,
            required: MIN_FIT_SPAN,
        });
    }
    if let Some(&last) = record.steps.last() {
        if last > path.len() {
            return Err(Error::LengthMismatch {
                expected: last,
                actual: path.len(),
            });
        }
    }
    let (bx, bk) = brownian_terms(path, params);
    let hm = params.hbar_over_m();
    let ks: Vec<f64> = record.p_mean.iter().map(|p| p / params.hbar).collect();
    let dq: Vec<f64> = record.steps.iter().zip(&record.q_mean).map(|(&s, q)| q - bx[s]).collect();
    let dk: Vec<f64> = record.steps.iter().zip(&ks).map(|(&s, k)| k - bk[s]).collect();

    let window_start = (0.5 * span).max(5.0) / omega;
    let rows: Vec<usize> = (0..record.len()).filter(|&i| record.times[i] >= window_start).collect();
    let m = rows.len();
    // Columns: X, K, transient in q, transient in k. k rows are scaled by
    // ħ/m so both series carry position units.
    let mut a = DMatrix::<f64>::zeros(2 * m, 4);
    let mut y = DVector::<f64>::zeros(2 * m);
    for (r, &i) in rows.iter().enumerate() {
        let t = record.times[i];
        let e = (-0.5 * omega * t).exp();
        a[(r, 0)] = 1.0;
        a[(r, 1)] = hm * t;
        a[(r, 2)] = e;
        y[r] = dq[i];
        a[(m + r, 1)] = hm;
        a[(m + r, 3)] = hm * e;
        y[m + r] = hm * dk[i];
    }
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&y, 1e-12)
        .map_err(|e| Error::ConfigInvalid(format!("least squares failed: {e}")))?;
    let residual_norm = ((&a * &coef - &y).norm_squared() / (2 * m) as f64).sqrt();

    let law = AsymptoticLaw {
        x: coef[0],
        k: coef[1],
        omega,
    };
    let q_residuals = record
        .times
        .iter()
        .zip(&dq)
        .map(|(t, d)| d - law.x - hm * law.k * t)
        .collect();
    let k_residuals = dk.iter().map(|d| d - law.k).collect();
    Ok(LongTimeFit {
        law,
        residual_norm,
        times: record.times.clone(),
        q_residuals,
        k_residuals,
        window_start,
    })
}

/// Variance of x̄_t − X − (ħ/m)Kt: (ħ/m)²λt³/3 + ħt/m + √λ(ħ/m)^{3/2}t².
pub fn asymptotic_x_variance(t: f64, params: &PhysicalParams) -> f64 {
    let hm = params.hbar_over_m();
    let l = params.lambda;
    hm * hm * l * t.powi(3) / 3.0 + hm * t + l.sqrt() * hm.powf(1.5) * t * t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(law: &AsymptoticLaw, path: &NoisePath, p: &PhysicalParams, amp: f64) -> TrajectoryRecord {
        let (xs, ks) = asymptotic_paths(law, path, p).unwrap();
        let mut r = TrajectoryRecord::new("synthetic");
        for j in 0..xs.len() {
            let t = j as f64 * path.dt;
            let e = amp * (-0.5 * law.omega * t).exp();
            r.times.push(t);
            r.steps.push(j);
            r.norm2.push(1.0);
            r.q_mean.push(xs[j] + e);
            r.p_mean.push(p.hbar * (ks[j] + e));
            r.var_q.push(p.asymptotic_var_q());
            r.var_p.push(0.0);
        }
        r
    }

    #[test]
    fn zero_path_is_classical_motion() {
        let p = PhysicalParams::natural();
        let law = AsymptoticLaw::new(1.0, 0.5, &p);
        let path = NoisePath::zeros(0.1, 10, NoiseKind::WMeasureP);
        let (xs, ks) = asymptotic_paths(&law, &path, &p).unwrap();
        for (j, (x, k)) in xs.iter().zip(&ks).enumerate() {
            assert!((x - (1.0 + 0.5 * 0.1 * j as f64)).abs() < 1e-14);
            assert_eq!(*k, 0.5);
        }
    }

    #[test]
    fn recovers_known_constants() {
        let p = PhysicalParams::natural();
        let law = AsymptoticLaw::new(0.7, -1.3, &p);
        let path = NoisePath::generate(3, 0, 1e-3, 10_000, NoiseKind::WMeasureP);
        let fit = fit_long_time(&synthetic(&law, &path, &p, 0.0), &path, &p).unwrap();
        assert!((fit.law.x - 0.7).abs() < 1e-6 && (fit.law.k + 1.3).abs() < 1e-6);

        let fit = fit_long_time(&synthetic(&law, &path, &p, 1.0), &path, &p).unwrap();
        assert!((fit.law.x - 0.7).abs() < 1e-2 && (fit.law.k + 1.3).abs() < 1e-2);
    }

    #[test]
    fn short_record_rejected() {
        let p = PhysicalParams::natural();
        let law = AsymptoticLaw::new(0.0, 0.0, &p);
        let path = NoisePath::generate(3, 0, 1e-2, 100, NoiseKind::WMeasureP);
        let err = fit_long_time(&synthetic(&law, &path, &p, 0.0), &path, &p).unwrap_err();
        assert!(matches!(err, Error::InsufficientSpan { .. }));
    }
}
