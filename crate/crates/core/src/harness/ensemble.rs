use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{RunConfig, SchemeKind};
use super::persist::write_atomic;
use crate::error::{Error, Result};
use crate::gaussian_flow::{gaussian_trajectory, GaussianScheme};
use crate::metrics::{born_statistics_from_finals, collapse_threshold, gaussian_distance, operator_a_variance, BornStatistics, Region};
use crate::qstate::{Fourier, GaussianState, WaveFunction};
use crate::record::{Frame, NoiseProvenance, TrajectoryRecord};
use crate::sde::{evolve, step_finite, EvolveOptions, FiniteState, GridScheme, NoiseKind, NoisePath, SplitStepper};

pub const OUTPUT_DIR_ENV: &str = "HSDIFF_OUTPUT_DIR";

/// `$HSDIFF_OUTPUT_DIR`, or `hsdiff-out` in the working directory.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("hsdiff-out"))
}

/// Per-trajectory seed: first eight bytes of SHA-256(seed ‖ index).
pub fn trajectory_seed(seed: u64, index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((index as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest length"))
}

fn noise_path(config: &RunConfig, index: usize, kind: NoiseKind) -> NoisePath {
    let n = config.n_steps();
    if config.noise {
        NoisePath::generate(trajectory_seed(config.seed, index), 0, config.dt, n, kind)
    } else {
        NoisePath::zeros(config.dt, n, kind)
    }
}

/// Runs trajectory `index` of the configured ensemble.
pub fn run_trajectory(config: &RunConfig, index: usize) -> Result<TrajectoryRecord> {
    let options = EvolveOptions {
        recenter: config.recenter,
        ..EvolveOptions::default()
    }
    .with_stride(config.record_stride)
    .with_diagnostics(config.diagnostics);
    match config.scheme {
        SchemeKind::Linear | SchemeKind::Nonlinear => {
            let scheme = if config.scheme == SchemeKind::Linear {
                GridScheme::Linear
            } else {
                GridScheme::Nonlinear
            };
            let psi = config.initial.render(&config.params, &config.grid)?;
            let path = noise_path(config, index, scheme.noise_kind());
            evolve(&psi, &path, &config.params, scheme, &options)
        }
        SchemeKind::GaussianFlow => {
            let g0 = match config.initial {
                super::config::InitialState::Gaussian { alpha_re, alpha_im, x, k } => {
                    GaussianState::normalized(Complex64::new(alpha_re, alpha_im), x, k)
                }
                _ => return Err(Error::ConfigInvalid("gaussian_flow needs a gaussian initial state".into())),
            };
            let path = noise_path(config, index, NoiseKind::XiMeasureQ);
            let scheme = if config.noise {
                GaussianScheme::Linear
            } else {
                GaussianScheme::Deterministic
            };
            Ok(gaussian_trajectory(&g0, &path, &config.params, scheme, config.record_stride)?.0)
        }
        SchemeKind::NsaGrid => run_nsa_grid(config),
        SchemeKind::FiniteDim => run_finite(config, index),
    }
}

fn push_grid(
    r: &mut TrajectoryRecord,
    config: &RunConfig,
    step: usize,
    psi: &WaveFunction,
    fourier: &mut Fourier,
) -> Result<()> {
    let obs = psi.observables_with(&config.params, fourier)?;
    r.times.push(step as f64 * config.dt);
    r.steps.push(step);
    r.norm2.push(obs.norm2);
    r.q_mean.push(obs.q_mean);
    r.p_mean.push(obs.p_mean);
    r.var_q.push(obs.var_q);
    r.var_p.push(obs.var_p);
    if config.diagnostics.gaussian_distance {
        let fit = gaussian_distance(psi, &config.params)?;
        r.gaussian_distance.get_or_insert_with(Vec::new).push(fit.distance);
    }
    if config.diagnostics.a_variance {
        let av = operator_a_variance(psi, &config.params)?;
        r.a_variance.get_or_insert_with(Vec::new).push(av.delta_a2);
    }
    Ok(())
}

fn run_nsa_grid(config: &RunConfig) -> Result<TrajectoryRecord> {
    let mut psi = config.initial.render(&config.params, &config.grid)?;
    let mut stepper = SplitStepper::unguarded(config.grid, config.params, config.dt)?;
    let mut fourier = Fourier::new(config.grid.n_points);
    let mut r = TrajectoryRecord::new("nsa_grid");
    push_grid(&mut r, config, 0, &psi, &mut fourier)?;
    let n = config.n_steps();
    for step in 1..=n {
        let t = step as f64 * config.dt;
        stepper.step_damped(&mut psi).map_err(|e| e.at_step(step, t))?;
        if step % config.record_stride == 0 || step == n {
            push_grid(&mut r, config, step, &psi, &mut fourier).map_err(|e| e.at_step(step, t))?;
        }
    }
    r.final_state = Some(psi);
    Ok(r)
}

/// Finite-dimensional runs store ⟨L⟩ and Var(L) in the q columns.
fn run_finite(config: &RunConfig, index: usize) -> Result<TrajectoryRecord> {
    let f = config
        .finite
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("finite section missing".into()))?;
    let amps: Vec<Complex64> = f.weights.iter().map(|w| Complex64::new(w.max(0.0).sqrt(), 0.0)).collect();
    let mut state = FiniteState::diagonal(&amps, &f.spectrum)?;
    let op = state.collapse_ops[0].clone();
    let path = noise_path(config, index, NoiseKind::WMeasureP);
    let mut r = TrajectoryRecord::new("finite_dim");
    r.noise = Some(NoiseProvenance {
        seed: path.seed,
        stream: path.stream,
        dt: path.dt,
        kind: path.kind,
    });
    let push = |r: &mut TrajectoryRecord, step: usize, s: &FiniteState| {
        r.times.push(step as f64 * config.dt);
        r.steps.push(step);
        r.norm2.push(s.vector.norm_squared());
        r.q_mean.push(s.expectation(&op));
        r.p_mean.push(f64::NAN);
        r.var_q.push(s.variance(&op));
        r.var_p.push(f64::NAN);
    };
    push(&mut r, 0, &state);
    let n = path.len();
    for (j, &d) in path.increments.iter().enumerate() {
        let step = j + 1;
        step_finite(&mut state, &[d], config.dt, config.params.lambda)
            .map_err(|e| e.at_step(step, step as f64 * config.dt))?;
        if step % config.record_stride == 0 || step == n {
            push(&mut r, step, &state);
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub config_hash: String,
    pub run_seed: u64,
    pub trajectory_seed: u64,
    pub index: usize,
    pub scheme: String,
    pub code_version: String,
    pub frame: Frame,
    pub noise: Option<NoiseProvenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFailure {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config_hash: String,
    pub scheme: String,
    pub n_trajectories: usize,
    pub n_succeeded: usize,
    pub failures: Vec<TrajectoryFailure>,
    pub times: Vec<f64>,
    pub columns: Vec<ColumnStats>,
    pub collapse: BornStatistics,
    pub median_final_gaussian_distance: Option<f64>,
}

impl EnsembleSummary {
    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EnsembleOptions {
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    /// Where to write per-trajectory files and the summary.
    pub output_dir: Option<PathBuf>,
}

pub struct EnsembleRun {
    pub summary: EnsembleSummary,
    /// Successful records, sorted by trajectory index.
    pub records: Vec<(usize, TrajectoryRecord)>,
}

fn write_trajectory(dir: &Path, manifest: &TrajectoryManifest, record: &TrajectoryRecord) -> Result<()> {
    let stem = format!("traj_{:06}", manifest.index);
    write_atomic(&dir.join(format!("{stem}.csv")), &record.to_csv_bytes()?)?;
    write_atomic(&dir.join(format!("{stem}.json")), &serde_json::to_vec_pretty(manifest)?)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Runs every trajectory of `config`, isolating failures, and aggregates
/// the successful ones in index order.
pub fn run_ensemble(config: &RunConfig, options: &EnsembleOptions) -> Result<EnsembleRun> {
    config.validate()?;
    let hash = config.hash()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("worker pool: {e}")))?;
    let traj_dir = options.output_dir.as_ref().map(|d| d.join("trajectories"));

    let mut results: Vec<(usize, Result<TrajectoryRecord>)> = pool.install(|| {
        (0..config.n_trajectories)
            .into_par_iter()
            .map(|index| {
                let outcome = run_trajectory(config, index).and_then(|record| {
                    if let Some(dir) = &traj_dir {
                        let manifest = TrajectoryManifest {
                            config_hash: hash.clone(),
                            run_seed: config.seed,
                            trajectory_seed: trajectory_seed(config.seed, index),
                            index,
                            scheme: record.scheme.clone(),
                            code_version: env!("CARGO_PKG_VERSION").to_string(),
                            frame: record.frame,
                            noise: record.noise,
                        };
                        write_trajectory(dir, &manifest, &record)?;
                    }
                    Ok(record)
                });
                (index, outcome)
            })
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);

    let mut failures = Vec::new();
    let mut records = Vec::new();
    for (index, r) in results {
        match r {
            Ok(rec) => records.push((index, rec)),
            Err(e) => failures.push(TrajectoryFailure {
                index,
                message: e.to_string(),
            }),
        }
    }
    let summary = summarize(config, hash, &records, failures)?;
    if let Some(dir) = &options.output_dir {
        write_atomic(&dir.join("summary.json"), &summary.to_json_bytes()?)?;
        write_atomic(&dir.join("config.txt"), config.to_flat_string()?.as_bytes())?;
    }
    Ok(EnsembleRun { summary, records })
}

fn summarize(
    config: &RunConfig,
    config_hash: String,
    records: &[(usize, TrajectoryRecord)],
    failures: Vec<TrajectoryFailure>,
) -> Result<EnsembleSummary> {
    let times = records.first().map(|(_, r)| r.times.clone()).unwrap_or_default();
    let aligned: Vec<&TrajectoryRecord> = records
        .iter()
        .map(|(_, r)| r)
        .filter(|r| r.times.len() == times.len())
        .collect();
    let mut columns = Vec::new();
    if let Some(first) = aligned.first() {
        for (name, values) in first.columns().into_iter().skip(1) {
            if values.iter().all(|v| v.is_nan()) {
                continue;
            }
            let series: Vec<Vec<f64>> = aligned
                .iter()
                .map(|r| {
                    r.columns()
                        .into_iter()
                        .find(|(n, _)| *n == name)
                        .map(|(_, c)| c)
                        .unwrap_or_else(|| vec![f64::NAN; times.len()])
                })
                .collect();
            let n = series.len() as f64;
            let mut mean = vec![0.0; times.len()];
            let mut variance = vec![0.0; times.len()];
            for i in 0..times.len() {
                let m = series.iter().map(|s| s[i]).sum::<f64>() / n;
                let v = if series.len() > 1 {
                    series.iter().map(|s| (s[i] - m).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                mean[i] = m;
                variance[i] = v;
            }
            columns.push(ColumnStats {
                name: name.to_string(),
                mean,
                variance,
            });
        }
    }

    let mut edges = config.born_edges.clone();
    edges.sort_by(f64::total_cmp);
    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend(edges);
    bounds.push(f64::INFINITY);
    let regions: Vec<Region> = bounds.windows(2).map(|w| Region::new(w[0], w[1])).collect();
    let finals: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|(_, r)| Some((*r.q_mean.last()?, *r.var_q.last()?)))
        .collect();
    let threshold = if config.scheme == SchemeKind::FiniteDim {
        1e-6
    } else {
        collapse_threshold(&config.params)
    };
    let collapse = born_statistics_from_finals(&finals, &regions, threshold);
    let median_final_gaussian_distance = median(
        records
            .iter()
            .filter_map(|(_, r)| r.gaussian_distance.as_ref()?.last().copied())
            .collect(),
    );

    Ok(EnsembleSummary {
        config_hash,
        scheme: config.scheme.name().to_string(),
        n_trajectories: config.n_trajectories,
        n_succeeded: records.len(),
        failures,
        times,
        columns,
        collapse,
        median_final_gaussian_distance,
    })
}
