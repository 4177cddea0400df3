use umbilic::centering::{phi_jacobian, reradialize, solve_center};
use umbilic::harness::experiment::random_convex_specs;
use umbilic::harness::{
    convergence_study, corollary_check, corollary_suite, generate, ratio_sweep, run_experiment,
    ConvergenceQuantity, ExperimentConfig, SurfaceKind, SurfaceSpec,
};
use umbilic::io::experiment_report;
use umbilic::spectral::SphereGrid;
use umbilic::{Error, RadialSurface};

fn translated(a: Vec<f64>, shape: Vec<usize>) -> RadialSurface {
    let n = shape.len();
    generate(&SurfaceSpec::new(
        SurfaceKind::TranslatedSphere { a },
        n,
        shape,
    ))
    .unwrap()
}

#[test]
fn sphere_run_is_the_zero_row() {
    let s = generate(&SurfaceSpec::sphere(2)).unwrap();
    let r = run_experiment(&s, &ExperimentConfig::default());
    assert!(r.failures.is_empty());
    let adm = r.admissibility.unwrap();
    assert!(adm.is_admissible);
    let g = r.rigidity.unwrap();
    assert!(g.degenerate);
    for v in [
        g.min_norm,
        g.hbar_norm,
        g.a_ring_norm,
        g.w2p_distance,
        g.ratio,
        g.linearized_residual,
    ] {
        assert!(v.abs() < 1e-10);
    }
    assert!((g.h_bar - 1.0).abs() < 1e-12);
}

#[test]
fn rescaling_does_not_change_the_report() {
    let spec = SurfaceSpec::ellipsoid_family(2, 0.05);
    let s = generate(&spec).unwrap();
    let config = ExperimentConfig::default();
    let a = run_experiment(&s, &config);
    let b = run_experiment(&s.shifted(0.3).unwrap(), &config);
    let (ra, rb) = (a.rigidity.unwrap(), b.rigidity.unwrap());
    assert!((ra.ratio - rb.ratio).abs() < 1e-9);
    assert!((ra.a_ring_norm - rb.a_ring_norm).abs() < 1e-9);
    assert!((a.epsilon - b.epsilon).abs() < 1e-9);
}

#[test]
fn identical_runs_give_identical_reports() {
    let spec = random_convex_specs(1, 3, 2).remove(0);
    let s = generate(&spec).unwrap();
    let config = ExperimentConfig::default();
    let a = experiment_report(&run_experiment(&s, &config)).render(false);
    let b = experiment_report(&run_experiment(&generate(&spec).unwrap(), &config)).render(false);
    assert_eq!(a, b);
}

#[test]
fn sweep_rows_follow_input_order_and_capture_failures() {
    let bad = SurfaceSpec::new(
        SurfaceKind::Ellipsoid {
            axes: vec![1.0, -1.0, 1.0],
        },
        2,
        vec![16, 32],
    );
    let specs = vec![
        SurfaceSpec::sphere(2).with_shape(vec![16, 32]),
        bad,
        SurfaceSpec::ellipsoid_family(2, 0.02).with_shape(vec![16, 32]),
    ];
    let rows = ratio_sweep(&specs, &[1.5, 3.0], &ExperimentConfig::default());
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].p, 1.5);
    assert_eq!(rows[1].p, 3.0);
    assert!(rows[0].label.starts_with("sphere"));
    assert!(rows[2].result.is_err() && rows[3].result.is_err());
    let r = rows[5].result.as_ref().unwrap();
    assert!(r.rigidity.as_ref().unwrap().ratio.is_finite());
}

#[test]
fn convergence_study_validates_shapes() {
    let spec = SurfaceSpec::sphere(2);
    let err = convergence_study(
        &spec,
        &[vec![16, 32], vec![16, 48]],
        ConvergenceQuantity::Codazzi,
    );
    assert!(matches!(err, Err(Error::InvalidSpec(_))));
    let rows = convergence_study(
        &spec,
        &[vec![8, 16], vec![12, 24]],
        ConvergenceQuantity::LinearizedKernel,
    )
    .unwrap();
    assert!(rows.iter().all(|r| r.residual == 0.0));
}

#[test]
fn corollary_checks() {
    let sphere = RadialSurface::round(SphereGrid::new(2, &[16, 32]).unwrap());
    assert!(corollary_check(&sphere, 2.0).unwrap().passed());
    let rows = corollary_suite(5, 11, 1.5, 2).unwrap();
    assert!(rows.iter().all(|r| r.passed()));
    assert!(corollary_suite(0, 1, 2.0, 2).is_err());
}

#[test]
fn translated_sphere_in_three_dimensions() {
    let a = vec![0.05, -0.02, 0.03, 0.04];
    let s = translated(a.clone(), vec![12, 12, 24]);
    let res = solve_center(&s, 1e-10, 50).unwrap();
    assert!(res.converged);
    let err: f64 = res
        .c0
        .iter()
        .zip(&a)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-8, "{err:e}");
    assert!(res.recentred.f().values().iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn phi_responds_with_minus_identity() {
    // For the unit sphere about -c the profile is -(c, x) + O(|c|²), whose
    // first-harmonic coefficient is -c; the Jacobian at the root is -I.
    let s = translated(vec![0.1, 0.0, 0.0], vec![24, 48]);
    let root = solve_center(&s, 1e-12, 50).unwrap();
    let jac = phi_jacobian(&s, &root.c0, 1e-5).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { -1.0 } else { 0.0 };
            assert!((jac[(i, j)] - expect).abs() < 1e-6, "{jac}");
        }
    }
}

#[test]
fn recentring_round_trip() {
    let s = translated(vec![0.1, 0.0, 0.0], vec![24, 48]);
    let c = [0.1, 0.0, 0.0];
    let there = reradialize(&s, &c).unwrap();
    let back = reradialize(&there, &[-0.1, 0.0, 0.0]).unwrap();
    let worst = back
        .f()
        .values()
        .iter()
        .zip(s.f().values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}
