use serde::{Deserialize, Serialize};

use super::flow::{mean_flow_det, mean_flow_stoch};
use crate::error::{Error, Result};
use crate::metrics::gaussian_width_distance;
use crate::qstate::{GaussianState, PhysicalParams};
use crate::record::{GaussianColumns, NoiseProvenance, TrajectoryRecord};
use crate::sde::{NoiseKind, NoisePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianScheme {
    /// Damped deterministic flow.
    Deterministic,
    /// Linear stochastic equation driven by ξ.
    Linear,
}

fn push(r: &mut TrajectoryRecord, step: usize, t: f64, g: &GaussianState, params: &PhysicalParams) {
    r.times.push(t);
    r.steps.push(step);
    r.norm2.push(g.norm_sqr());
    r.q_mean.push(g.x_mean);
    r.p_mean.push(params.hbar * g.k_mean);
    r.var_q.push(g.var_q());
    r.var_p.push(params.hbar * params.hbar * g.var_k());
    r.gaussian_distance
        .get_or_insert_with(Vec::new)
        .push(gaussian_width_distance(g.alpha, params));
    let c = r.gaussian.get_or_insert_with(GaussianColumns::default);
    c.re_alpha.push(g.alpha.re);
    c.im_alpha.push(g.alpha.im);
    c.x_mean.push(g.x_mean);
    c.k_mean.push(g.k_mean);
}

/// Integrates a Gaussian along `path`. The deterministic scheme uses only
/// the path's time step and length. Returns the record and the final state.
pub fn gaussian_trajectory(
    g0: &GaussianState,
    path: &NoisePath,
    params: &PhysicalParams,
    scheme: GaussianScheme,
    stride: usize,
) -> Result<(TrajectoryRecord, GaussianState)> {
    if stride == 0 {
        return Err(Error::ConfigInvalid("stride must be >= 1".into()));
    }
    if scheme == GaussianScheme::Linear && path.kind != NoiseKind::XiMeasureQ {
        return Err(Error::ConfigInvalid("linear Gaussian flow needs a xi-kind path".into()));
    }
    let name = match scheme {
        GaussianScheme::Deterministic => "gaussian_deterministic",
        GaussianScheme::Linear => "gaussian_linear",
    };
    let mut r = TrajectoryRecord::new(name);
    if scheme == GaussianScheme::Linear {
        r.noise = Some(NoiseProvenance {
            seed: path.seed,
            stream: path.stream,
            dt: path.dt,
            kind: path.kind,
        });
    }
    let mut g = *g0;
    push(&mut r, 0, 0.0, &g, params);
    let n = path.len();
    for (j, &d) in path.increments.iter().enumerate() {
        let step = j + 1;
        let t = step as f64 * path.dt;
        let next = match scheme {
            GaussianScheme::Deterministic => mean_flow_det(&g, path.dt, params),
            GaussianScheme::Linear => mean_flow_stoch(&g, d, path.dt, params),
        };
        g = next.map_err(|e| match e {
            Error::BlowUp(_) => Error::BlowUp(step),
            other => other.at_step(step, t),
        })?;
        if step % stride == 0 || step == n {
            push(&mut r, step, t, &g, params);
        }
    }
    Ok((r, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn export_has_gaussian_columns() {
        let p = PhysicalParams::natural();
        let path = NoisePath::generate(1, 0, 1e-3, 50, NoiseKind::XiMeasureQ);
        let (r, _) =
            gaussian_trajectory(&GaussianState::coherent(&p, 0.0, 0.0), &path, &p, GaussianScheme::Linear, 10)
                .unwrap();
        assert_eq!(r.len(), 6);
        let text = String::from_utf8(r.to_csv_bytes().unwrap()).unwrap();
        assert!(text
            .lines()
            .next()
            .unwrap()
            .ends_with("gaussian_distance,re_alpha,im_alpha,x_mean,k_mean"));
    }
}
