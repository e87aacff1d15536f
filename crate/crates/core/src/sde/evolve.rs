use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::noise::{NoiseKind, NoisePath};
use super::stepper::SplitStepper;
use crate::error::{Error, Result};
use crate::metrics::{gaussian_distance, operator_a_variance};
use crate::qstate::{Fourier, PhysicalParams, WaveFunction, DEFAULT_BOUNDARY_TOLERANCE};
use crate::record::{Frame, NoiseProvenance, TrajectoryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScheme {
    /// Unnormalized linear equation driven by ξ.
    Linear,
    /// Norm-preserving collapse equation driven by W.
    Nonlinear,
}

impl GridScheme {
    pub fn name(&self) -> &'static str {
        match self {
            GridScheme::Linear => "linear",
            GridScheme::Nonlinear => "nonlinear",
        }
    }

    pub fn noise_kind(&self) -> NoiseKind {
        match self {
            GridScheme::Linear => NoiseKind::XiMeasureQ,
            GridScheme::Nonlinear => NoiseKind::WMeasureP,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub gaussian_distance: bool,
    pub a_variance: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Record every `stride` steps; the last step is always recorded.
    pub stride: usize,
    pub diagnostics: Diagnostics,
    /// Keep nonlinear states centred on the grid by exact lattice
    /// translations and boosts. Ignored for the linear scheme, which is
    /// not translation covariant.
    pub recenter: bool,
    pub recenter_every: usize,
    /// Recentre only once Var(q) drops below this; `None` means
    /// (half-width / 10)².
    pub recenter_max_var: Option<f64>,
    pub boundary_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            diagnostics: Diagnostics::default(),
            recenter: false,
            recenter_every: 20,
            recenter_max_var: None,
            boundary_tolerance: DEFAULT_BOUNDARY_TOLERANCE,
        }
    }
}

impl EvolveOptions {
    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn recentered(mut self) -> Self {
        self.recenter = true;
        self
    }

    pub fn with_diagnostics(mut self, diagnostics: Diagnostics) -> Self {
        self.diagnostics = diagnostics;
        self
    }
}

struct Recorder<'a> {
    params: &'a PhysicalParams,
    diagnostics: Diagnostics,
    fourier: Fourier,
    record: TrajectoryRecord,
}

impl Recorder<'_> {
    fn push(&mut self, step: usize, t: f64, psi: &WaveFunction, frame: &Frame) -> Result<()> {
        let obs = psi.observables_with(self.params, &mut self.fourier)?;
        let r = &mut self.record;
        r.times.push(t);
        r.steps.push(step);
        r.norm2.push(obs.norm2);
        r.q_mean.push(obs.q_mean + frame.x_offset);
        r.p_mean.push(obs.p_mean + self.params.hbar * frame.k_offset);
        r.var_q.push(obs.var_q);
        r.var_p.push(obs.var_p);
        if self.diagnostics.gaussian_distance || self.diagnostics.a_variance {
            let unit = psi.normalized()?;
            if self.diagnostics.gaussian_distance {
                let fit = gaussian_distance(&unit, self.params)?;
                r.gaussian_distance.get_or_insert_with(Vec::new).push(fit.distance);
            }
            if self.diagnostics.a_variance {
                let av = operator_a_variance(&unit, self.params)?;
                r.a_variance.get_or_insert_with(Vec::new).push(av.delta_a2);
            }
        }
        Ok(())
    }
}

/// Shifts the state by whole grid cells and whole transform bins so that
/// its position and wavenumber means sit near zero.
fn recenter(psi: &mut WaveFunction, frame: &mut Frame, fourier: &mut Fourier, max_var: f64) -> Result<()> {
    let (m, var) = psi.q_moments()?;
    if var > max_var {
        return Ok(());
    }
    let grid = *psi.grid();
    let cells = ((m - grid.center()) / grid.dx()).round() as isize;
    if cells != 0 {
        let n = grid.n_points as isize;
        let shift = cells.rem_euclid(n) as usize;
        psi.amplitudes_mut().rotate_left(shift);
        frame.x_offset += cells as f64 * grid.dx();
    }
    let transform = psi.to_transform(fourier);
    let (mut w0, mut w1) = (0.0, 0.0);
    for (v, k) in transform.iter().zip(grid.wavenumbers()) {
        let w = v.norm_sqr();
        w0 += w;
        w1 += w * k;
    }
    let bins = (w1 / w0 / grid.dk()).round();
    if bins != 0.0 {
        let kappa = bins * grid.dk();
        for (j, a) in psi.amplitudes_mut().iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, -kappa * grid.x(j));
        }
        frame.k_offset += kappa;
    }
    Ok(())
}

/// Integrates `initial` along `path` and records observables.
///
/// Errors from a step are wrapped with the failing step index and time.
pub fn evolve(
    initial: &WaveFunction,
    path: &NoisePath,
    params: &PhysicalParams,
    scheme: GridScheme,
    options: &EvolveOptions,
) -> Result<TrajectoryRecord> {
    if path.kind != scheme.noise_kind() {
        return Err(Error::ConfigInvalid(format!(
            "{} scheme needs a {:?} path, got {:?}",
            scheme.name(),
            scheme.noise_kind(),
            path.kind
        )));
    }
    if options.stride == 0 {
        return Err(Error::ConfigInvalid("stride must be >= 1".into()));
    }
    let grid = *initial.grid();
    let mut stepper = SplitStepper::new(grid, *params, path.dt)?
        .with_boundary_tolerance(options.boundary_tolerance);
    let mut recorder = Recorder {
        params,
        diagnostics: options.diagnostics,
        fourier: Fourier::new(grid.n_points),
        record: TrajectoryRecord::new(scheme.name()),
    };
    recorder.record.noise = Some(NoiseProvenance {
        seed: path.seed,
        stream: path.stream,
        dt: path.dt,
        kind: path.kind,
    });

    let mut psi = initial.clone();
    if scheme == GridScheme::Nonlinear {
        psi.normalize().map_err(|e| e.at_step(0, 0.0))?;
    }
    let mut frame = Frame::default();
    let recenter_on = options.recenter && scheme == GridScheme::Nonlinear;
    let max_var = options
        .recenter_max_var
        .unwrap_or_else(|| (grid.half_width() / 10.0).powi(2));
    let mut fourier = Fourier::new(grid.n_points);
    let velocity = params.hbar_over_m();

    recorder
        .push(0, 0.0, &psi, &frame)
        .map_err(|e| e.at_step(0, 0.0))?;
    let n = path.len();
    for (j, &d) in path.increments.iter().enumerate() {
        let step = j + 1;
        let t = step as f64 * path.dt;
        let res = match scheme {
            GridScheme::Linear => stepper.step_linear(&mut psi, d),
            GridScheme::Nonlinear => {
                stepper.step_nonlinear_in_frame(&mut psi, d, velocity * frame.k_offset * path.dt)
            }
        };
        res.map_err(|e| e.at_step(step, t))?;
        frame.x_offset += velocity * frame.k_offset * path.dt;
        if recenter_on && step % options.recenter_every.max(1) == 0 {
            recenter(&mut psi, &mut frame, &mut fourier, max_var).map_err(|e| e.at_step(step, t))?;
        }
        if step % options.stride == 0 || step == n {
            recorder
                .push(step, t, &psi, &frame)
                .map_err(|e| e.at_step(step, t))?;
        }
    }
    let mut record = recorder.record;
    record.frame = frame;
    record.final_state = Some(psi);
    Ok(record)
}

/// dW_j = dξ_j − 2√λ ⟨q⟩_j dt, with ⟨q⟩_j taken at the start of step j.
pub fn girsanov_transform(
    xi_path: &NoisePath,
    q_means: &[f64],
    params: &PhysicalParams,
) -> Result<NoisePath> {
    if q_means.len() != xi_path.len() {
        return Err(Error::LengthMismatch {
            expected: xi_path.len(),
            actual: q_means.len(),
        });
    }
    let c = 2.0 * params.lambda.sqrt() * xi_path.dt;
    Ok(NoisePath {
        dt: xi_path.dt,
        increments: xi_path
            .increments
            .iter()
            .zip(q_means)
            .map(|(dxi, q)| dxi - c * q)
            .collect(),
        seed: xi_path.seed,
        stream: xi_path.stream,
        kind: NoiseKind::WMeasureP,
    })
}
