//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::io::Write;
use std::time::Instant;

use hsdiff::gaussian_flow::{asymptotic_x_variance, fit_long_time, mean_flow_stoch, riccati_solve, uniform_times};
use hsdiff::harness::compare::girsanov_routes;
use hsdiff::harness::{run_ensemble, EnsembleOptions, InitialState, RunConfig, SchemeKind};
use hsdiff::metrics::{
    born_statistics_from_finals, counterexample_sequence, gaussian_distance, Region, Spectrum,
};
use hsdiff::nsa::{eigenmode, spectral_residual, ModeTable};
use hsdiff::qstate::render_gaussian;
use hsdiff::regimes::{build_report, RegimeInputs};
use hsdiff::sde::{
    evolve, girsanov_transform, step_finite, EvolveOptions, FiniteState, GridScheme, NoiseKind, NoisePath,
    SplitStepper,
};
use hsdiff::{GaussianState, GridSpec, PhysicalParams, WaveFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

/// Writes past the test harness capture so the line always shows.
fn report(n: usize, title: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance criterion {n:>2} [{status}] {title}: {detail}");
    let _ = out.flush();
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[test]
fn c01_riccati_attractor() {
    let p = PhysicalParams::natural();
    let star = p.z2() / 2.0;
    let dt = 1e-4;
    let t_end = 25.0 / p.omega();
    let n = (t_end / dt).round() as usize;
    let times = uniform_times(dt, n);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let started = Instant::now();
    let mut worst_final = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..200 {
        let a0 = Complex64::new(rng.random_range(0.02..20.0), rng.random_range(-10.0..10.0));
        let path = riccati_solve(a0, &times, &p).unwrap();
        worst_final = worst_final.max((path[n] - star).norm());
        // Closed form α(t) = α* tanh(κt + atanh(α0/α*)), κ = 2iħα*/m.
        let kappa = Complex64::new(0.0, 2.0 * p.hbar / p.mass) * star;
        let c = (a0 / star).atanh();
        for &j in &[n / 100, n / 10, n / 2] {
            let exact = star * (kappa * times[j] + c).tanh();
            worst_oracle = worst_oracle.max((path[j] - exact).norm() / exact.norm());
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_final < 1e-6 && elapsed < 10.0 && worst_oracle < 1e-8;
    report(
        1,
        "Riccati attractor",
        pass,
        &format!(
            "max |alpha - z^2/2| at wt=25 = {worst_final:.2e} (< 1e-6), max rel. deviation from closed form = \
             {worst_oracle:.2e}, 200 widths in {elapsed:.2} s (< 10 s)"
        ),
    );
    assert!(pass);
}

#[test]
fn c02_nsa_eigensystem() {
    let p = PhysicalParams::natural();
    let grid = GridSpec::symmetric(20.0, 512).unwrap();
    let mut worst_residual = 0.0f64;
    for n in 0..=10 {
        worst_residual = worst_residual.max(spectral_residual(&eigenmode(n, &p, &grid).unwrap(), &p));
    }
    let table = ModeTable::new(20, &p, &grid).unwrap();
    let mut worst_pairing = 0.0f64;
    for n in 0..=20 {
        for m in 0..=20 {
            let expected = if n == m { 1.0 } else { 0.0 };
            worst_pairing = worst_pairing.max((table.pairing(n, m) - expected).norm());
        }
    }
    let pass = worst_residual < 1e-6 && worst_pairing < 1e-8;
    report(
        2,
        "NSA eigensystem",
        pass,
        &format!(
            "max spectral residual n<=10 = {worst_residual:.2e} (< 1e-6), max |pairing - identity| n,m<=20 = \
             {worst_pairing:.2e} (< 1e-8)"
        ),
    );
    assert!(pass);
}

/// Sup over x of ||ψ_t| − |ψ_0|| / t under the normalized damped flow.
fn stationary_drift(psi0: &WaveFunction, p: &PhysicalParams, t: f64, dt: f64) -> f64 {
    let mut psi = psi0.normalized().unwrap();
    let start: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm()).collect();
    let mut stepper = SplitStepper::unguarded(*psi.grid(), *p, dt).unwrap();
    let steps = (t / dt).round() as usize;
    for _ in 0..steps {
        stepper.step_damped(&mut psi).unwrap();
    }
    psi.amplitudes()
        .iter()
        .zip(&start)
        .map(|(a, s)| (a.norm() - s).abs())
        .fold(0.0, f64::max)
        / t
}

#[test]
fn c03_stationarity_and_selection() {
    let p = PhysicalParams::natural();
    let grid = GridSpec::symmetric(16.0, 256).unwrap();
    let table = ModeTable::new(10, &p, &grid).unwrap();
    let mut worst_drift = 0.0f64;
    for n in 0..=10 {
        let u = table.mode(n).unwrap().profile;
        worst_drift = worst_drift.max(stationary_drift(&u, &p, 1.0, 1e-4));
    }

    // u1 + u2 under the same flow.
    let u1 = table.mode(1).unwrap().profile.normalized().unwrap();
    let mut psi = WaveFunction::new(
        grid,
        table.profile(1).iter().zip(table.profile(2)).map(|(a, b)| a + b).collect(),
    )
    .unwrap()
    .normalized()
    .unwrap();
    let dt = 1e-3;
    let mut stepper = SplitStepper::unguarded(grid, p, dt).unwrap();
    let mut times = Vec::new();
    let mut residuals = Vec::new();
    let mut min_manifold = gaussian_distance(&psi, &p).unwrap().distance;
    for step in 1..=8000 {
        stepper.step_damped(&mut psi).unwrap();
        if step % 100 == 0 {
            let t = step as f64 * dt;
            times.push(t);
            residuals.push(psi.phase_distance(&u1));
            min_manifold = min_manifold.min(gaussian_distance(&psi, &p).unwrap().distance);
        }
    }
    // Least-squares slope of ln(residual) over 2 <= t <= 6.
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&residuals)
        .filter(|(t, _)| (2.0..=6.0).contains(*t))
        .map(|(t, r)| (*t, r.ln()))
        .collect();
    let tm = pts.iter().map(|q| q.0).sum::<f64>() / pts.len() as f64;
    let ym = pts.iter().map(|q| q.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|(t, y)| (t - tm) * (y - ym)).sum::<f64>()
        / pts.iter().map(|(t, _)| (t - tm).powi(2)).sum::<f64>();
    let rate = -slope;
    let expected_rate = p.omega() / 2.0;
    let limit_distance = gaussian_distance(&u1, &p).unwrap().distance;
    let final_residual = *residuals.last().unwrap();

    let pass = worst_drift < 1e-6
        && ((rate - expected_rate) / expected_rate).abs() < 0.05
        && min_manifold > 0.5
        && limit_distance > 0.5
        && final_residual < 1e-3;
    report(
        3,
        "stationarity and selection",
        pass,
        &format!(
            "max sup-drift n<=10 = {worst_drift:.2e}/time (< 1e-6); u1+u2 residual rate = {rate:.4} vs {expected_rate} \
             (5%), residual at t=8 = {final_residual:.1e}; min Gaussian distance along flow = {min_manifold:.3}, \
             distance of limit u1 = {limit_distance:.3} (> 0.5)"
        ),
    );
    assert!(pass);
}

/// ‖(A − ⟨A⟩)ψ‖² for ψ = αφ_n + βφ_{n+1}, A φ_k = √k φ_k, in double-double.
fn variance_oracle(n: usize, alpha: f64, beta: f64) -> f64 {
    let a0 = TwoFloat::from(n as f64).sqrt();
    let a1 = TwoFloat::from((n + 1) as f64).sqrt();
    let wa = TwoFloat::from(alpha) * TwoFloat::from(alpha);
    let wb = TwoFloat::from(beta) * TwoFloat::from(beta);
    let m = wa * a0 + wb * a1;
    let d0 = a0 - m;
    let d1 = a1 - m;
    f64::from(wa * d0 * d0 + wb * d1 * d1)
}

#[test]
fn c04_counterexample_formula() {
    let alpha = 0.6f64;
    let beta = 0.8f64;
    let ns: Vec<usize> = (0..200).chain((3..=6).map(|e| 10usize.pow(e))).collect();
    let terms = counterexample_sequence(ns.iter().copied(), Complex64::new(alpha, 0.0), Complex64::new(0.0, beta), &Spectrum::Sqrt)
        .unwrap();
    let worst_rel = terms
        .iter()
        .map(|t| ((t.delta_a2 - variance_oracle(t.n, alpha, beta)) / variance_oracle(t.n, alpha, beta)).abs())
        .fold(0.0, f64::max);

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let halves = counterexample_sequence(ns.iter().copied(), Complex64::new(h, 0.0), Complex64::new(h, 0.0), &Spectrum::Sqrt)
        .unwrap();
    let decreasing = halves.windows(2).all(|w| w[1].delta_a2 < w[0].delta_a2);
    let last = halves.last().unwrap();
    let pinned = halves.iter().all(|t| (t.max_overlap - 0.5).abs() < 1e-15);
    let pass = worst_rel < 1e-12 && decreasing && last.delta_a2 < 1e-7 && pinned;
    report(
        4,
        "counterexample formula",
        pass,
        &format!(
            "max rel. error vs direct variance = {worst_rel:.1e} (< 1e-12); a_k = sqrt k: delta A^2 falls \
             monotonically to {:.2e} at n = 1e6 with overlap {} (1/2)",
            last.delta_a2, last.max_overlap
        ),
    );
    assert!(pass);
}

#[test]
fn c05_norm_martingale() {
    let p = PhysicalParams::natural();
    let grid = GridSpec::symmetric(10.0, 64).unwrap();
    let dt = 1e-3;
    let checkpoints = [500usize, 1000, 2000];
    let n_paths = 10_000;
    let psi0 = render_gaussian(&GaussianState::normalized(Complex64::new(0.6, 0.2), 0.4, 0.3), &grid).unwrap();
    let started = Instant::now();
    let mut stepper = SplitStepper::new(grid, p, dt).unwrap();
    let mut samples = vec![Vec::with_capacity(n_paths); checkpoints.len()];
    for i in 0..n_paths {
        let path = NoisePath::generate(5, i as u64, dt, 2000, NoiseKind::XiMeasureQ);
        let mut psi = psi0.clone();
        let mut c = 0;
        for (j, &d) in path.increments.iter().enumerate() {
            stepper.step_linear(&mut psi, d).unwrap();
            if j + 1 == checkpoints[c] {
                samples[c].push(psi.norm_sqr());
                c += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let mut pass = elapsed < 300.0;
    let mut parts = Vec::new();
    for (c, s) in checkpoints.iter().zip(&samples) {
        let m = mean(s);
        let se = (sample_variance(s) / s.len() as f64).sqrt();
        let z = (m - 1.0) / se;
        pass &= z.abs() < 3.0;
        parts.push(format!("t={}: {m:.4} +/- {se:.4} ({z:+.2} se)", *c as f64 * dt));
    }
    report(
        5,
        "norm martingale",
        pass,
        &format!("E|phi_t|^2 over 1e4 paths: {}; {elapsed:.0} s (< 300 s)", parts.join(", ")),
    );
    assert!(pass);
}

#[test]
fn c06_girsanov_route_equivalence() {
    let p = PhysicalParams::natural();
    let grid = GridSpec::symmetric(10.0, 128).unwrap();
    let psi0 = render_gaussian(&GaussianState::normalized(Complex64::new(0.4, 0.2), 0.5, -0.3), &grid).unwrap();
    let report_routes = girsanov_routes(&psi0, &p, &[1e-2, 1e-3, 1e-4], 1.0, 17).unwrap();
    let distances: Vec<f64> = report_routes.rows.iter().map(|r| r.distance).collect();
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);

    // Independent check at dt = 1e-4 through the recorded integrator: the
    // linear run's ⟨q⟩ series is transformed into W for the nonlinear run.
    let dt = 1e-4;
    let xi = NoisePath::generate(23, 0, dt, 10_000, NoiseKind::XiMeasureQ);
    let linear = evolve(&psi0, &xi, &p, GridScheme::Linear, &EvolveOptions::default()).unwrap();
    let w = girsanov_transform(&xi, &linear.q_mean[..xi.len()], &p).unwrap();
    let nonlinear = evolve(&psi0, &w, &p, GridScheme::Nonlinear, &EvolveOptions::default()).unwrap();
    let a = linear.final_state.unwrap().normalized().unwrap();
    let b = nonlinear.final_state.unwrap();
    let same_step = a.distance(&b);

    let finest = *distances.last().unwrap();
    let pass = finest < 5e-3 && monotone && same_step < 5e-3;
    report(
        6,
        "Girsanov route equivalence",
        pass,
        &format!(
            "L2 distance at t=1 for dt = 1e-2, 1e-3, 1e-4: {:.2e}, {:.2e}, {:.2e} (finest < 5e-3, decreasing: \
             {monotone}); step-matched routes at dt=1e-4: {same_step:.2e}",
            distances[0], distances[1], distances[2]
        ),
    );
    assert!(pass);
}

#[test]
fn c07_gaussian_flow_oracle() {
    let p = PhysicalParams::natural();
    let grid = GridSpec::symmetric(14.0, 256).unwrap();
    let dt = 1e-4;
    let g0 = GaussianState::normalized(Complex64::new(1.5, -0.4), -0.7, 0.9);
    let mut worst_abs = 0.0f64;
    let mut worst_rel = 0.0f64;
    for stream in 0..4 {
        let xi = NoisePath::generate(99, stream, dt, 10_000, NoiseKind::XiMeasureQ);
        let psi = evolve(&render_gaussian(&g0, &grid).unwrap(), &xi, &p, GridScheme::Linear, &EvolveOptions::default())
            .unwrap()
            .final_state
            .unwrap();
        let mut g = g0;
        for &d in &xi.increments {
            g = mean_flow_stoch(&g, d, dt, &p).unwrap();
        }
        let reduced = WaveFunction::from_fn(grid, |x| g.value(x)).unwrap();
        let d = psi.distance(&reduced);
        worst_abs = worst_abs.max(d);
        worst_rel = worst_rel.max(d / psi.norm());
    }
    let pass = worst_abs < 1e-3 && worst_rel < 1e-3;
    report(
        7,
        "Gaussian-flow oracle",
        pass,
        &format!("max L2 distance reduced flow vs grid at t=1 over 4 paths: {worst_abs:.2e} (relative {worst_rel:.2e}; < 1e-3)"),
    );
    assert!(pass);
}

#[test]
fn c08_theorem_at_desk_scale() {
    let p = PhysicalParams::natural();
    let t_end = 15.0 / p.omega();
    let dt = 2.5e-4;
    let n_steps = (t_end / dt).round() as usize;
    let config = RunConfig {
        scheme: SchemeKind::Nonlinear,
        dt,
        t_end,
        record_stride: n_steps,
        n_trajectories: 200,
        seed: 8,
        grid: GridSpec::symmetric(16.0, 128).unwrap(),
        initial: InitialState::NsaMode { n: 1 },
        diagnostics: hsdiff::sde::Diagnostics {
            gaussian_distance: true,
            a_variance: true,
        },
        ..RunConfig::default()
    };
    let run = run_ensemble(&config, &EnsembleOptions::default()).unwrap();
    let s = &run.summary;
    let finals: Vec<(f64, f64)> = run
        .records
        .iter()
        .map(|(_, r)| {
            (
                *r.gaussian_distance.as_ref().unwrap().last().unwrap(),
                *r.a_variance.as_ref().unwrap().last().unwrap(),
            )
        })
        .collect();
    let distances: Vec<f64> = finals.iter().map(|f| f.0).collect();
    let variances: Vec<f64> = finals.iter().map(|f| f.1).collect();
    let med_d = median(distances.clone());
    let med_a = median(variances);
    let below = distances.iter().filter(|&&d| d < 0.1).count() as f64 / distances.len() as f64;
    let pass = s.failures.is_empty() && med_d < 0.05 && med_a < 1e-3 && below >= 0.9;
    report(
        8,
        "theorem at desk scale",
        pass,
        &format!(
            "200 nonlinear paths from u1 at wt=15: median Gaussian distance {med_d:.2e} (< 0.05), median delta A^2 \
             {med_a:.2e} (< 1e-3), {:.1}% below 0.1 (>= 90%), {} failures",
            100.0 * below,
            s.failures.len()
        ),
    );
    assert!(pass);
}

#[test]
fn c09_asymptotic_mean_laws() {
    let p = PhysicalParams::natural();
    let dt = 1e-3;
    let n = 1000;
    let t = n as f64 * dt;
    let n_paths = 10_000;
    let sl = p.lambda.sqrt();
    // Reduced nonlinear flow from the attractor: the normalized linear
    // Gaussian driven by dξ = dW + 2√λ⟨q⟩dt.
    let mut xs = Vec::with_capacity(n_paths);
    let mut ks = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let w = NoisePath::generate(9, i as u64, dt, n, NoiseKind::WMeasureP);
        let mut g = GaussianState::coherent(&p, 0.0, 0.0);
        for &dw in &w.increments {
            g = mean_flow_stoch(&g, dw + 2.0 * sl * g.x_mean * dt, dt, &p).unwrap();
        }
        xs.push(g.x_mean);
        ks.push(g.k_mean);
    }
    let var_k = sample_variance(&ks);
    let expected_k = p.lambda * t;
    let se_k = expected_k * (2.0 / (n_paths - 1) as f64).sqrt();
    let z_k = (var_k - expected_k) / se_k;
    let var_x = sample_variance(&xs);
    let expected_x = asymptotic_x_variance(t, &p);
    let rel_x = (var_x - expected_x) / expected_x;

    // Grid trajectories from off-attractor starts, fitted to the long-time law.
    let grid = GridSpec::symmetric(16.0, 128).unwrap();
    let gdt = 5e-5;
    let steps = (8.0 / gdt) as usize;
    let options = EvolveOptions::default().with_stride(200).recentered();
    let omega = p.omega();
    let mut envelope_ok = true;
    let mut worst_ratio = 0.0f64;
    let mut c_max = 0.0f64;
    for (i, (a, x0, k0)) in [(2.0, 0.5, 0.0), (0.3, -1.0, 0.8), (1.0, 0.0, -1.5)].into_iter().enumerate() {
        let psi0 = render_gaussian(&GaussianState::normalized(Complex64::new(a, 0.4), x0, k0), &grid).unwrap();
        let w = NoisePath::generate(31, i as u64, gdt, steps, NoiseKind::WMeasureP);
        let record = evolve(&psi0, &w, &p, GridScheme::Nonlinear, &options).unwrap();
        let fit = fit_long_time(&record, &w, &p).unwrap();
        let env = |t: f64| (-0.5 * omega * t).exp();
        let res: Vec<(f64, f64)> = fit
            .times
            .iter()
            .zip(fit.q_residuals.iter().zip(&fit.k_residuals))
            .map(|(&t, (q, k))| (t, q.abs().max(k.abs())))
            .collect();
        // C from the early transient, then checked with 50% slack up to
        // t = 7, before the envelope meets the integrator's O(dt) floor.
        let c = res
            .iter()
            .filter(|(t, _)| (0.5..=1.5).contains(t))
            .map(|(t, r)| r / env(*t))
            .fold(0.0, f64::max);
        c_max = c_max.max(c);
        for &(tt, r) in res.iter().filter(|(t, _)| *t >= 0.5 && *t <= 7.0) {
            let ratio = r / (c * env(tt));
            worst_ratio = worst_ratio.max(ratio);
            envelope_ok &= ratio <= 1.5;
        }
    }

    let pass = z_k.abs() < 3.0 && rel_x.abs() < 0.05 && envelope_ok;
    report(
        9,
        "asymptotic mean laws",
        pass,
        &format!(
            "Var k(t=1) = {var_k:.4} vs lambda t = {expected_k} ({z_k:+.2} sigma, N=1e4); Var x(t=1) = {var_x:.4} vs \
             {expected_x:.4} ({:+.2}%); fit residuals / C e^(-wt/2) <= {worst_ratio:.2} over 0.5 <= t <= 7 (C <= {c_max:.2})",
            100.0 * rel_x
        ),
    );
    assert!(pass);
}

#[test]
fn c10_born_statistics() {
    let config = RunConfig {
        scheme: SchemeKind::Nonlinear,
        dt: 2.5e-4,
        t_end: 2.0,
        record_stride: 8000,
        n_trajectories: 400,
        seed: 10,
        grid: GridSpec::symmetric(16.0, 128).unwrap(),
        initial: InitialState::TwoBump {
            x1: -5.0,
            x2: 5.0,
            w1: 0.7,
        },
        born_edges: vec![0.0],
        ..RunConfig::default()
    };
    let run = run_ensemble(&config, &EnsembleOptions::default()).unwrap();
    let born = &run.summary.collapse;
    let f_left = born.fractions[0];
    let se = (0.7f64 * 0.3 / born.n_collapsed as f64).sqrt();
    let z_grid = (f_left - 0.7) / se;

    // Finite-dimensional analogue: three levels with populations 0.5/0.3/0.2.
    let weights = [0.5, 0.3, 0.2];
    let spectrum = [-1.0, 0.0, 1.0];
    let amps: Vec<Complex64> = weights.iter().map(|w: &f64| Complex64::new(w.sqrt(), 0.0)).collect();
    let n_runs = 10_000;
    let dt = 1e-3;
    let mut finals = Vec::with_capacity(n_runs);
    for i in 0..n_runs {
        let mut state = FiniteState::diagonal(&amps, &spectrum).unwrap();
        let op = state.collapse_ops[0].clone();
        let w = NoisePath::generate(12, i as u64, dt, 12_000, NoiseKind::WMeasureP);
        for &d in &w.increments {
            step_finite(&mut state, &[d], dt, 1.0).unwrap();
        }
        finals.push((state.expectation(&op), state.variance(&op)));
    }
    let regions = [Region::new(-1.5, -0.5), Region::new(-0.5, 0.5), Region::new(0.5, 1.5)];
    // Collapsed: at most ~1% weight left off the dominant level.
    let stats = born_statistics_from_finals(&finals, &regions, 1e-2);
    let mut worst_z = 0.0f64;
    for (f, w) in stats.fractions.iter().zip(weights) {
        let se = (w * (1.0 - w) / stats.n_collapsed as f64).sqrt();
        worst_z = worst_z.max(((f - w) / se).abs());
    }

    let pass = born.n_collapsed == 400 && z_grid.abs() < 3.0 && stats.n_collapsed as f64 >= 0.99 * n_runs as f64 && worst_z < 3.0;
    report(
        10,
        "Born statistics",
        pass,
        &format!(
            "two-bump 70/30: left fraction {f_left:.4} ({z_grid:+.2} sigma, {} of 400 collapsed); three-level \
             analogue fractions {:.4}/{:.4}/{:.4} vs 0.5/0.3/0.2 (max {worst_z:.2} sigma, {} of 1e4 collapsed)",
            born.n_collapsed, stats.fractions[0], stats.fractions[1], stats.fractions[2], stats.n_collapsed
        ),
    );
    assert!(pass);
}

#[test]
fn c11_regime_numbers() {
    let r = build_report(RegimeInputs::new(1e-3)).unwrap();
    let checks = [
        ("omega", r.omega, 5.01e-5, 0.01),
        ("threshold", r.decayed_mode_threshold, 2.00e7, 0.01),
        ("sqrt(hbar/m)", r.noise_position_coeff, 3.24e-16, 0.01),
        ("diffusive onset", r.diffusive_onset, 9.53e10, 0.02),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, got, quoted, tol) in checks {
        let rel = (got - quoted) / quoted;
        pass &= rel.abs() < tol;
        parts.push(format!("{name} {got:.4e} vs {quoted:.3e} ({:+.2}%)", 100.0 * rel));
    }
    report(11, "regime numbers", pass, &parts.join(", "));
    assert!(pass);
}

#[test]
fn c12_mass_amplification() {
    let dt = 2.5e-4;
    let grid = GridSpec::symmetric(8.0, 128).unwrap();
    let late_var = |mass: f64| -> f64 {
        let p = PhysicalParams::natural_scaled(mass).unwrap();
        let t_end = 20.0 / p.omega();
        let steps = (t_end / dt).round() as usize;
        let mut acc = Vec::new();
        for stream in 0..2 {
            let psi0 = render_gaussian(&GaussianState::normalized(Complex64::new(1.5, 0.3), 0.4, 0.0), &grid).unwrap();
            let w = NoisePath::generate(40, stream, dt, steps, NoiseKind::WMeasureP);
            let r = evolve(&psi0, &w, &p, GridScheme::Nonlinear, &EvolveOptions::default().with_stride(100).recentered())
                .unwrap();
            acc.extend(
                r.times
                    .iter()
                    .zip(&r.var_q)
                    .filter(|(t, _)| **t * p.omega() >= 15.0)
                    .map(|(_, v)| *v),
            );
        }
        mean(&acc)
    };
    let v1 = late_var(1.0);
    let v4 = late_var(4.0);
    let ratio = v1 / v4;
    let pass = ((ratio - 4.0) / 4.0).abs() < 0.02;
    report(
        12,
        "mass amplification",
        pass,
        &format!("asymptotic Var(q): m = {v1:.5}, 4m = {v4:.5}, ratio {ratio:.4} (4 within 2%)"),
    );
    assert!(pass);
}
