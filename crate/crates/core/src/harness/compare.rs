use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_flow::mean_flow_stoch;
use crate::qstate::{render_gaussian, GaussianState, GridSpec, PhysicalParams, WaveFunction};
use crate::sde::{girsanov_transform, NoiseKind, NoisePath, SplitStepper};

/// Pathwise L² tolerance for the route comparison at the finest step.
pub const ROUTE_TOLERANCE: f64 = 5e-3;
/// Relative tolerance for the reduced Gaussian flow against the grid.
pub const GAUSSIAN_ORACLE_TOLERANCE: f64 = 1e-3;
/// Reference noise is sampled this many times finer than the finest step.
pub const REFERENCE_REFINEMENT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteRow {
    pub dt: f64,
    pub n_steps: usize,
    /// ‖ψ_linear/‖ψ_linear‖ − ψ_nonlinear‖ at the final time.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    pub t_end: f64,
    pub reference_dt: f64,
    pub seed: u64,
    /// Sorted from coarsest to finest step.
    pub rows: Vec<RouteRow>,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub monotone: bool,
}

impl RouteReport {
    pub fn passed(&self) -> bool {
        self.within_tolerance && self.monotone
    }
}

fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    let n = (t_end / dt).round();
    if !(n >= 1.0) || ((n * dt - t_end).abs() > 1e-9 * t_end) {
        return Err(Error::ConfigInvalid(format!(
            "dt = {dt} does not divide t_end = {t_end}"
        )));
    }
    Ok(n as usize)
}

/// Compares the two ways of producing a collapse trajectory on one
/// Brownian realization.
///
/// A ξ path is sampled at `min(dts) / 10` and the linear equation solved
/// on it to obtain ⟨q⟩ and hence W. For each `dt`, route A solves the
/// linear equation with ξ coarsened to `dt` and normalizes; route B solves
/// the nonlinear equation with W coarsened to `dt`. Both use the
/// multiplicative splitting without the step-size guard so that coarse
/// steps can be measured rather than refused.
pub fn girsanov_routes(
    initial: &WaveFunction,
    params: &PhysicalParams,
    dts: &[f64],
    t_end: f64,
    seed: u64,
) -> Result<RouteReport> {
    if dts.is_empty() {
        return Err(Error::ConfigInvalid("compare needs at least one dt".into()));
    }
    let mut dts = dts.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    let dt_min = *dts.last().expect("nonempty");
    let reference_dt = dt_min / REFERENCE_REFINEMENT as f64;
    let n_ref = steps_for(t_end, reference_dt)?;
    let grid = *initial.grid();

    let xi = NoisePath::generate(seed, 0, reference_dt, n_ref, NoiseKind::XiMeasureQ);
    let mut stepper = SplitStepper::unguarded(grid, *params, reference_dt)?;
    let mut phi = initial.normalized()?;
    let mut q_means = Vec::with_capacity(n_ref);
    for (j, &d) in xi.increments.iter().enumerate() {
        q_means.push(phi.q_mean()?);
        stepper
            .step_linear(&mut phi, d)
            .map_err(|e| e.at_step(j + 1, (j + 1) as f64 * reference_dt))?;
        // Rescale to keep the unnormalized state representable; ⟨q⟩ is
        // unaffected.
        phi.normalize()?;
    }
    let w = girsanov_transform(&xi, &q_means, params)?;

    let mut rows = Vec::with_capacity(dts.len());
    for &dt in &dts {
        let n = steps_for(t_end, dt)?;
        let factor = n_ref / n;
        if factor * n != n_ref {
            return Err(Error::ConfigInvalid(format!(
                "dt = {dt} is not a multiple of the reference step {reference_dt}"
            )));
        }
        let xi_c = xi.coarsen(factor)?;
        let w_c = w.coarsen(factor)?;
        let mut stepper = SplitStepper::unguarded(grid, *params, dt)?;
        let mut a = initial.normalized()?;
        let mut b = a.clone();
        for j in 0..n {
            let t = (j + 1) as f64 * dt;
            stepper
                .step_linear(&mut a, xi_c.increments[j])
                .and_then(|_| a.normalize())
                .map_err(|e| e.at_step(j + 1, t))?;
            stepper
                .step_nonlinear(&mut b, w_c.increments[j])
                .map_err(|e| e.at_step(j + 1, t))?;
        }
        rows.push(RouteRow {
            dt,
            n_steps: n,
            distance: a.distance(&b),
        });
    }
    let monotone = rows.windows(2).all(|p| p[1].distance < p[0].distance);
    let within_tolerance = rows.last().expect("nonempty").distance < ROUTE_TOLERANCE;
    Ok(RouteReport {
        t_end,
        reference_dt,
        seed,
        rows,
        tolerance: ROUTE_TOLERANCE,
        within_tolerance,
        monotone,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianOracleReport {
    pub dt: f64,
    pub t_end: f64,
    pub seeds: Vec<u64>,
    /// ‖φ_grid − φ_flow‖ / ‖φ_grid‖ per seed.
    pub relative_distances: Vec<f64>,
    pub tolerance: f64,
}

impl GaussianOracleReport {
    pub fn max_distance(&self) -> f64 {
        self.relative_distances.iter().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_distance() < self.tolerance
    }
}

/// Reduced Gaussian flow against a grid solve of the linear equation on
/// the same ξ paths.
pub fn gaussian_oracle(
    g0: &GaussianState,
    grid: &GridSpec,
    params: &PhysicalParams,
    dt: f64,
    t_end: f64,
    seeds: &[u64],
) -> Result<GaussianOracleReport> {
    let n = steps_for(t_end, dt)?;
    let mut relative_distances = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let xi = NoisePath::generate(seed, 0, dt, n, NoiseKind::XiMeasureQ);
        let mut stepper = SplitStepper::new(*grid, *params, dt)?;
        let mut phi = render_gaussian(g0, grid)?;
        let mut g = *g0;
        for (j, &d) in xi.increments.iter().enumerate() {
            let t = (j + 1) as f64 * dt;
            stepper.step_linear(&mut phi, d).map_err(|e| e.at_step(j + 1, t))?;
            g = mean_flow_stoch(&g, d, dt, params).map_err(|e| e.at_step(j + 1, t))?;
        }
        let reduced = WaveFunction::from_fn(*grid, |x| g.value(x))?;
        let mut diff = phi.clone();
        for (a, b) in diff.amplitudes_mut().iter_mut().zip(reduced.amplitudes()) {
            *a -= *b;
        }
        relative_distances.push(diff.norm() / phi.norm());
    }
    Ok(GaussianOracleReport {
        dt,
        t_end,
        seeds: seeds.to_vec(),
        relative_distances,
        tolerance: GAUSSIAN_ORACLE_TOLERANCE,
    })
}

/// Default start for route comparisons: a displaced, chirped Gaussian.
pub fn default_route_state(grid: &GridSpec) -> Result<WaveFunction> {
    render_gaussian(&GaussianState::normalized(Complex64::new(0.4, 0.2), 0.5, -0.3), grid)
}
