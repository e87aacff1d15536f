use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use super::compare::{gaussian_oracle, girsanov_routes};
use super::config::{parse_override, InitialState, RunConfig};
use super::ensemble::{default_output_dir, run_ensemble, run_trajectory, EnsembleOptions};
use super::persist::{fmt_f64, write_atomic};
use crate::error::{Error, Result};
use crate::gaussian_flow::{gaussian_trajectory, GaussianScheme};
use crate::metrics::{counterexample_sequence, gaussian_distance, operator_a_variance, Spectrum};
use crate::nsa::{eigenmode, shifted_expand, spectral_residual};
use crate::qstate::{GaussianState, GridSpec};
use crate::regimes::{build_report, RegimeInputs};
use crate::sde::{NoiseKind, NoisePath, SplitStepper};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Sup drift of |ψ| per unit time allowed for a stationary mode.
pub const STATIONARY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "hsdiff", version, about = "Collapse dynamics of a free quantum particle")]
pub struct Cli {
    /// Run configuration (flat `key = value` with dotted sections).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set dt=1e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output directory; defaults to $HSDIFF_OUTPUT_DIR or ./hsdiff-out.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write plot-ready CSVs and a manifest to the output directory.
    #[arg(long, global = true)]
    pub emit_plot_data: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory.
    Simulate {
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Integrate an ensemble and aggregate it.
    Ensemble {
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Reduced Gaussian flow from the configured Gaussian start.
    Gaussian {
        /// Deterministic width flow instead of the stochastic one.
        #[arg(long)]
        deterministic: bool,
    },
    /// Non-self-adjoint oscillator modes and projections.
    Spectrum(SpectrumArgs),
    /// Operator-A variance and the two-level counterexample sequence.
    Variance(VarianceArgs),
    /// Characteristic scales for a body of given mass (SI).
    Regimes(RegimesArgs),
    /// Route-equivalence and oracle checks; exit 3 on failure.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 0)]
    pub mode: usize,
    /// Evolve the mode under the damped flow and measure the drift of |ψ|.
    #[arg(long)]
    pub check_stationary: bool,
    /// Expand the configured initial state around its mean.
    #[arg(long)]
    pub project: bool,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// Print ΔA² of ψ_n = αφ_n + βφ_{n+1} for n = 0..count.
    #[arg(long)]
    pub counterexample: Option<usize>,
    #[arg(long, value_enum, default_value_t = SpectrumKind::Sqrt)]
    pub spectrum: SpectrumKind,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub alpha: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpectrumKind {
    Linear,
    Sqrt,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct RegimesArgs {
    /// Mass in kg.
    #[arg(long, default_value_t = 1e-3)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Perception time T in seconds.
    #[arg(long, default_value_t = 1e-3)]
    pub perception_time: f64,
    /// Emit the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Girsanov,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_enum, default_value_t = Route::Girsanov)]
    pub routes: Route,
    /// Step sizes; repeat or comma-separate.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-4])]
    pub dt: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
}

struct Context {
    config: RunConfig,
    output: PathBuf,
    emit: bool,
    emitted: Vec<String>,
}

#[derive(Serialize)]
struct PlotManifest<'a> {
    command: &'a str,
    config_hash: String,
    code_version: &'a str,
    files: &'a [String],
}

impl Context {
    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if self.emit {
            write_atomic(&self.output.join(name), bytes)?;
            self.emitted.push(name.to_string());
        }
        Ok(())
    }

    fn finish(&self, command: &str) -> Result<()> {
        if self.emit {
            let m = PlotManifest {
                command,
                config_hash: self.config.hash()?,
                code_version: env!("CARGO_PKG_VERSION"),
                files: &self.emitted,
            };
            let mut bytes = serde_json::to_vec_pretty(&m)?;
            bytes.push(b'\n');
            write_atomic(&self.output.join("manifest.json"), &bytes)?;
        }
        Ok(())
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let overrides = cli
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>>>()?;
    let config = match &cli.config {
        Some(path) => RunConfig::load(path, &overrides)?,
        None => RunConfig::default().with_overrides(&overrides)?,
    };
    config.validate()?;
    Ok(config)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Results go to `out`, errors to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = e.print();
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hsdiff: configuration error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut ctx = Context {
        config,
        output: cli.output.clone().unwrap_or_else(default_output_dir),
        emit: cli.emit_plot_data,
        emitted: Vec::new(),
    };
    match dispatch(&cli.command, &mut ctx, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hsdiff: {e}");
            match e {
                Error::ConfigInvalid(_) | Error::InvalidParams(_) | Error::InvalidGrid(_) | Error::BadWeights(_) => {
                    EXIT_USAGE
                }
                _ => EXIT_RUNTIME,
            }
        }
    }
}

fn dispatch(command: &Command, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let (name, code) = match command {
        Command::Simulate { index } => ("simulate", simulate(*index, ctx, out)?),
        Command::Ensemble { workers } => ("ensemble", ensemble(*workers, ctx, out)?),
        Command::Gaussian { deterministic } => ("gaussian", gaussian(*deterministic, ctx, out)?),
        Command::Spectrum(a) => ("spectrum", spectrum(a, ctx, out)?),
        Command::Variance(a) => ("variance", variance(a, ctx, out)?),
        Command::Regimes(a) => ("regimes", regimes(a, ctx, out)?),
        Command::Compare(a) => ("compare", compare(a, ctx, out)?),
    };
    ctx.finish(name)?;
    Ok(code)
}

fn last(v: &[f64]) -> f64 {
    v.last().copied().unwrap_or(f64::NAN)
}

fn simulate(index: usize, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let record = run_trajectory(&ctx.config, index)?;
    writeln!(out, "scheme      {}", record.scheme)?;
    writeln!(out, "config hash {}", ctx.config.hash()?)?;
    writeln!(out, "t           {}", fmt_f64(last(&record.times)))?;
    writeln!(out, "<q>         {}", fmt_f64(last(&record.q_mean)))?;
    writeln!(out, "<p>         {}", fmt_f64(last(&record.p_mean)))?;
    writeln!(out, "var q       {}", fmt_f64(last(&record.var_q)))?;
    writeln!(out, "var p       {}", fmt_f64(last(&record.var_p)))?;
    if let Some(d) = &record.gaussian_distance {
        writeln!(out, "gaussian distance {}", fmt_f64(last(d)))?;
    }
    ctx.emit("trajectory.csv", &record.to_csv_bytes()?)?;
    Ok(EXIT_OK)
}

fn ensemble(workers: Option<usize>, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let run = run_ensemble(
        &ctx.config,
        &EnsembleOptions {
            workers,
            output_dir: Some(ctx.output.clone()),
        },
    )?;
    let s = &run.summary;
    writeln!(out, "trajectories {} ok, {} failed", s.n_succeeded, s.failures.len())?;
    for f in &s.failures {
        writeln!(out, "  trajectory {}: {}", f.index, f.message)?;
    }
    for col in &s.columns {
        writeln!(
            out,
            "{:<18} mean {:>24}  variance {:>24}",
            col.name,
            fmt_f64(last(&col.mean)),
            fmt_f64(last(&col.variance))
        )?;
    }
    let c = &s.collapse;
    writeln!(out, "collapsed {} / {}", c.n_collapsed, c.n_collapsed + c.n_not_collapsed)?;
    for (r, f) in c.regions.iter().zip(&c.fractions) {
        writeln!(out, "  [{}, {})  {}", r.lo, r.hi, fmt_f64(*f))?;
    }
    if let Some(m) = s.median_final_gaussian_distance {
        writeln!(out, "median final gaussian distance {}", fmt_f64(m))?;
    }
    if ctx.emit {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        for c in &s.columns {
            header.push(format!("{}_mean", c.name));
            header.push(format!("{}_var", c.name));
        }
        w.write_record(&header)?;
        for (i, t) in s.times.iter().enumerate() {
            let mut row = vec![fmt_f64(*t)];
            for c in &s.columns {
                row.push(fmt_f64(c.mean[i]));
                row.push(fmt_f64(c.variance[i]));
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        ctx.emit("ensemble_mean.csv", &bytes)?;
    }
    Ok(if s.n_succeeded == 0 { EXIT_RUNTIME } else { EXIT_OK })
}

fn gaussian(deterministic: bool, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let cfg = &ctx.config;
    let InitialState::Gaussian { alpha_re, alpha_im, x, k } = cfg.initial else {
        return Err(Error::ConfigInvalid("initial.kind must be gaussian".into()));
    };
    let g0 = GaussianState::normalized(Complex64::new(alpha_re, alpha_im), x, k);
    let n = cfg.n_steps();
    let (path, scheme) = if deterministic || !cfg.noise {
        (NoisePath::zeros(cfg.dt, n, NoiseKind::XiMeasureQ), GaussianScheme::Deterministic)
    } else {
        (
            NoisePath::generate(cfg.seed, 0, cfg.dt, n, NoiseKind::XiMeasureQ),
            GaussianScheme::Linear,
        )
    };
    let (record, g) = gaussian_trajectory(&g0, &path, &cfg.params, scheme, cfg.record_stride)?;
    let star = cfg.params.alpha_star();
    writeln!(out, "alpha      {} {:+}i", fmt_f64(g.alpha.re), fmt_f64(g.alpha.im))?;
    writeln!(out, "z^2/2      {} {:+}i", fmt_f64(star.re), fmt_f64(star.im))?;
    writeln!(out, "|alpha - z^2/2| {}", fmt_f64((g.alpha - star).norm()))?;
    writeln!(out, "x_mean     {}", fmt_f64(g.x_mean))?;
    writeln!(out, "k_mean     {}", fmt_f64(g.k_mean))?;
    ctx.emit("gaussian.csv", &record.to_csv_bytes()?)?;
    Ok(EXIT_OK)
}

/// Max over x of ||ψ_t| − |ψ_0|| / t under the normalized damped flow.
pub fn stationary_drift(
    n: usize,
    params: &crate::qstate::PhysicalParams,
    grid: &GridSpec,
    t: f64,
    dt: f64,
) -> Result<f64> {
    let mut psi = eigenmode(n, params, grid)?.profile.normalized()?;
    let start: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm()).collect();
    let steps = (t / dt).round().max(1.0) as usize;
    let mut stepper = SplitStepper::unguarded(*grid, *params, dt)?;
    for j in 0..steps {
        stepper
            .step_damped(&mut psi)
            .map_err(|e| e.at_step(j + 1, (j + 1) as f64 * dt))?;
    }
    let sup = psi
        .amplitudes()
        .iter()
        .zip(&start)
        .map(|(a, s)| (a.norm() - s).abs())
        .fold(0.0, f64::max);
    Ok(sup / (steps as f64 * dt))
}

fn spectrum(a: &SpectrumArgs, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let params = ctx.config.params;
    let grid = ctx.config.grid;
    let mode = eigenmode(a.mode, &params, &grid)?;
    writeln!(out, "mode       {}", a.mode)?;
    writeln!(
        out,
        "eigenvalue {} {:+}i",
        fmt_f64(mode.eigenvalue.re),
        fmt_f64(mode.eigenvalue.im)
    )?;
    writeln!(out, "residual   {}", fmt_f64(spectral_residual(&mode, &params)))?;
    let mut code = EXIT_OK;
    if a.check_stationary {
        let drift = stationary_drift(a.mode, &params, &grid, a.t, a.dt)?;
        let ok = drift < STATIONARY_TOLERANCE;
        writeln!(
            out,
            "sup-drift  {} per unit time ({})",
            fmt_f64(drift),
            if ok { "stationary" } else { "NOT stationary" }
        )?;
        if !ok {
            code = EXIT_CHECK_FAILED;
        }
    }
    if ctx.emit {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "re", "im"])?;
        for (j, v) in mode.profile.amplitudes().iter().enumerate() {
            w.write_record([fmt_f64(grid.x(j)), fmt_f64(v.re), fmt_f64(v.im)])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        ctx.emit(&format!("mode_{}.csv", a.mode), &bytes)?;
    }
    if a.project {
        let psi = ctx.config.initial.render(&params, &grid)?;
        let e = shifted_expand(&psi, &params, a.n_max)?;
        writeln!(out, "expansion about x = {}, k = {}", fmt_f64(e.x_shift), fmt_f64(e.k_shift))?;
        writeln!(out, "residual   {}", fmt_f64(e.residual))?;
        for (n, c) in e.coefficients.iter().enumerate() {
            writeln!(out, "  c_{n:<3} {} {:+}i", fmt_f64(c.re), fmt_f64(c.im))?;
        }
        let mut bytes = Vec::new();
        e.write_csv(&mut bytes)?;
        ctx.emit("projection.csv", &bytes)?;
    }
    Ok(code)
}

fn variance(a: &VarianceArgs, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let params = ctx.config.params;
    let psi = ctx.config.initial.render(&params, &ctx.config.grid)?;
    let av = operator_a_variance(&psi, &params)?;
    let fit = gaussian_distance(&psi, &params)?;
    writeln!(out, "delta A^2         {}", fmt_f64(av.delta_a2))?;
    writeln!(out, "<A>               {} {:+}i", fmt_f64(av.mean_a.re), fmt_f64(av.mean_a.im))?;
    writeln!(out, "gaussian distance {}", fmt_f64(fit.distance))?;
    if let Some(count) = a.counterexample {
        let spectrum = match a.spectrum {
            SpectrumKind::Linear => Spectrum::Linear,
            SpectrumKind::Sqrt => Spectrum::Sqrt,
            SpectrumKind::Quadratic => Spectrum::Quadratic,
        };
        let terms = counterexample_sequence(
            0..count,
            Complex64::new(a.alpha, 0.0),
            Complex64::new(a.beta, 0.0),
            &spectrum,
        )?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "gap", "delta_a2", "max_overlap"])?;
        writeln!(out, "{:>5} {:>24} {:>24} {:>24}", "n", "gap", "delta A^2", "max overlap")?;
        for t in &terms {
            writeln!(
                out,
                "{:>5} {:>24} {:>24} {:>24}",
                t.n,
                fmt_f64(t.gap),
                fmt_f64(t.delta_a2),
                fmt_f64(t.max_overlap)
            )?;
            w.write_record([t.n.to_string(), fmt_f64(t.gap), fmt_f64(t.delta_a2), fmt_f64(t.max_overlap)])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        ctx.emit("counterexample.csv", &bytes)?;
    }
    Ok(EXIT_OK)
}

fn regimes(a: &RegimesArgs, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let inputs = RegimeInputs {
        c: a.c,
        perception_time: a.perception_time,
        ..RegimeInputs::new(a.mass)
    };
    let report = build_report(inputs)?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    if a.json {
        out.write_all(&json)?;
    } else {
        writeln!(out, "{report}")?;
    }
    ctx.emit("regimes.json", &json)?;
    Ok(EXIT_OK)
}

fn compare(a: &CompareArgs, ctx: &mut Context, out: &mut dyn Write) -> Result<i32> {
    let cfg = &ctx.config;
    match a.routes {
        Route::Girsanov => {
            let psi = cfg.initial.render(&cfg.params, &cfg.grid)?;
            let r = girsanov_routes(&psi, &cfg.params, &a.dt, a.t_end, cfg.seed)?;
            writeln!(out, "girsanov routes, t = {}, reference dt = {}", a.t_end, r.reference_dt)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["dt", "distance"])?;
            for row in &r.rows {
                writeln!(out, "  dt {:<10} distance {}", row.dt, fmt_f64(row.distance))?;
                w.write_record([fmt_f64(row.dt), fmt_f64(row.distance)])?;
            }
            writeln!(
                out,
                "tolerance {} at finest dt: {}; decreasing under refinement: {}",
                r.tolerance,
                if r.within_tolerance { "ok" } else { "FAIL" },
                if r.monotone { "ok" } else { "FAIL" }
            )?;
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            ctx.emit("girsanov_routes.csv", &bytes)?;
            Ok(if r.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Route::Gaussian => {
            let InitialState::Gaussian { alpha_re, alpha_im, x, k } = cfg.initial else {
                return Err(Error::ConfigInvalid("initial.kind must be gaussian".into()));
            };
            let g0 = GaussianState::normalized(Complex64::new(alpha_re, alpha_im), x, k);
            let dt = a.dt.iter().copied().fold(f64::INFINITY, f64::min);
            let seeds: Vec<u64> = (0..3).map(|i| cfg.seed.wrapping_add(i)).collect();
            let r = gaussian_oracle(&g0, &cfg.grid, &cfg.params, dt, a.t_end, &seeds)?;
            for (s, d) in r.seeds.iter().zip(&r.relative_distances) {
                writeln!(out, "  seed {s:<6} relative distance {}", fmt_f64(*d))?;
            }
            let ok = r.passed();
            writeln!(out, "tolerance {}: {}", r.tolerance, if ok { "ok" } else { "FAIL" })?;
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Writes `cli` help into a string; used by the binary's tests.
pub fn help_text() -> String {
    use clap::CommandFactory;
    Cli::command().render_help().to_string()
}
