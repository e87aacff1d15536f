use hsdiff::qstate::render_gaussian;
use hsdiff::sde::{girsanov_transform, NoiseKind, NoisePath, SplitStepper};
use hsdiff::{GaussianState, GridSpec, PhysicalParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::symmetric(12.0, 128).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nonlinear_step_preserves_norm(x in -3.0..3.0f64, k in -2.0..2.0f64, re in 0.3..3.0f64, im in -1.0..1.0f64,
                                     dw in -0.05..0.05f64) {
        let p = PhysicalParams::natural();
        let g = GaussianState::normalized(Complex64::new(re, im), x, k);
        let mut psi = render_gaussian(&g, &grid()).unwrap();
        let mut stepper = SplitStepper::new(grid(), p, 5e-4).unwrap();
        for _ in 0..5 {
            stepper.step_nonlinear(&mut psi, dw).unwrap();
        }
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarsening_keeps_the_path(seed in 0u64..1000, factor in 1usize..8) {
        let path = NoisePath::generate(seed, 3, 1e-3, 8 * factor * 5, NoiseKind::XiMeasureQ);
        let coarse = path.coarsen(factor).unwrap();
        prop_assert_eq!(coarse.len(), path.len() / factor);
        prop_assert!((coarse.dt - path.dt * factor as f64).abs() < 1e-15);
        let fine = path.cumulative();
        for (j, w) in coarse.cumulative().iter().enumerate() {
            prop_assert!((w - fine[j * factor]).abs() < 1e-12);
        }
    }
}

#[test]
fn noise_streams_are_reproducible_and_distinct() {
    let a = NoisePath::generate(7, 0, 1e-2, 1000, NoiseKind::WMeasureP);
    let b = NoisePath::generate(7, 0, 1e-2, 1000, NoiseKind::WMeasureP);
    let c = NoisePath::generate(7, 1, 1e-2, 1000, NoiseKind::WMeasureP);
    assert_eq!(a, b);
    assert_ne!(a.increments, c.increments);
    let big = NoisePath::generate(1, 0, 1e-2, 200_000, NoiseKind::WMeasureP);
    let var = big.increments.iter().map(|d| d * d).sum::<f64>() / big.len() as f64;
    // Standard error of the sample variance is dt·√(2/N).
    assert!((var - 1e-2).abs() < 5.0 * 1e-2 * (2.0 / 200_000f64).sqrt(), "{var}");
}

#[test]
fn noise_path_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = NoisePath::generate(42, 5, 2.5e-4, 333, NoiseKind::XiMeasureQ);
    let file = dir.path().join("noise.bin");
    path.save(&file).unwrap();
    assert_eq!(NoisePath::load(&file).unwrap(), path);
    std::fs::write(&file, b"HSNPbroken").unwrap();
    assert!(NoisePath::load(&file).is_err());
}

#[test]
fn coarsen_rejects_uneven_factor() {
    let path = NoisePath::generate(1, 0, 1e-3, 10, NoiseKind::XiMeasureQ);
    assert!(path.coarsen(3).is_err());
    assert!(path.coarsen(0).is_err());
}

#[test]
fn girsanov_shift() {
    let p = PhysicalParams::natural();
    let xi = NoisePath::generate(3, 0, 1e-2, 4, NoiseKind::XiMeasureQ);
    let q = [0.0, 1.0, -0.5, 2.0];
    let w = girsanov_transform(&xi, &q, &p).unwrap();
    assert_eq!(w.kind, NoiseKind::WMeasureP);
    for ((dw, dxi), q) in w.increments.iter().zip(&xi.increments).zip(q) {
        assert!((dw - (dxi - 2.0 * q * 1e-2)).abs() < 1e-15);
    }
    assert!(girsanov_transform(&xi, &q[..3], &p).is_err());
}

#[test]
fn attractor_is_fixed_without_noise() {
    let p = PhysicalParams::natural();
    let g = GaussianState::coherent(&p, 0.0, 0.0);
    let start = render_gaussian(&g, &grid()).unwrap();
    let mut psi = start.clone();
    let mut stepper = SplitStepper::new(grid(), p, 5e-4).unwrap();
    for _ in 0..4000 {
        stepper.step_nonlinear(&mut psi, 0.0).unwrap();
    }
    assert!(psi.phase_distance(&start) < 1e-6, "{}", psi.phase_distance(&start));
}

#[test]
fn step_guard_rejects_large_steps() {
    let p = PhysicalParams::natural();
    assert!(SplitStepper::new(GridSpec::symmetric(40.0, 256).unwrap(), p, 1e-3).is_err());
    assert!(SplitStepper::unguarded(GridSpec::symmetric(40.0, 256).unwrap(), p, 1e-3).is_ok());
}
