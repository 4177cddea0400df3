use proptest::prelude::*;
use std::sync::Arc;
use umbilic::geometry::convexity_check;
use umbilic::rigidity::{best_lambda, hbar_norm, obata_projection};
use umbilic::spectral::{evaluate, lp_norm, ScalarField, SphereGrid};
use umbilic::RadialSurface;

fn grid() -> Arc<SphereGrid> {
    SphereGrid::new(2, &[12, 24]).unwrap()
}

/// Low-degree polynomial profile with bounded coefficients.
fn profile(c: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x: &[f64]| {
        c[0] * x[0]
            + c[1] * x[1]
            + c[2] * x[2]
            + c[3] * x[0] * x[2]
            + c[4] * (x[2] * x[2] - x[1] * x[1])
            + c[5] * x[0] * x[1] * x[2]
    }
}

fn coefficients(amp: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-amp..amp, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_norm_is_homogeneous(c in coefficients(1.0), s in -3.0f64..3.0, p in 1.1f64..4.0) {
        let f = ScalarField::from_fn(grid(), profile(&c));
        let lhs = lp_norm(&f.scale(s), p, None).unwrap();
        let rhs = s.abs() * lp_norm(&f, p, None).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn obata_projection_is_idempotent(c in coefficients(0.3)) {
        let f = ScalarField::from_fn(grid(), profile(&c));
        let (v, rest) = obata_projection(&f);
        let (w, _) = obata_projection(&rest);
        prop_assert!(w.iter().all(|x| x.abs() < 1e-14));
        for (a, b) in v.iter().zip(&c[..3]) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mean_fit_is_within_the_sandwich(c in coefficients(0.05), p in 1.2f64..4.0) {
        let s = RadialSurface::new(ScalarField::from_fn(grid(), profile(&c)), "prop").unwrap();
        let b = s.geometry().unwrap();
        prop_assume!(convexity_check(&b).is_convex);
        let (_, m) = best_lambda(&b, p).unwrap();
        let h = hbar_norm(&b, p).unwrap();
        prop_assert!(m <= h + 1e-12 * (1.0 + h));
        prop_assert!(h <= 3.0 * m + 1e-9);
    }

    #[test]
    fn scaling_covariance(c in coefficients(0.05), t in -0.5f64..0.5, p in 1.2f64..4.0) {
        let f = ScalarField::from_fn(grid(), profile(&c));
        let s = RadialSurface::new(f.clone(), "a").unwrap();
        let st = s.shifted(t).unwrap();
        let (b, bt) = (s.geometry().unwrap(), st.geometry().unwrap());
        let n = 2.0;
        for (h, ht) in b.h.values().iter().zip(bt.h.values()) {
            prop_assert!((ht - (-t).exp() * h).abs() < 1e-12);
        }
        let norm = lp_norm(&b.a_traceless, p, Some(&b.metric())).unwrap();
        let norm_t = lp_norm(&bt.a_traceless, p, Some(&bt.metric())).unwrap();
        let factor = (t * (n / p - 1.0)).exp();
        prop_assert!((norm_t - factor * norm).abs() <= 1e-11 * (1.0 + norm));
        prop_assert!((bt.volume() - (n * t).exp() * b.volume()).abs() < 1e-11 * b.volume());
    }

    #[test]
    fn christoffel_symbols_are_symmetric(c in coefficients(0.1)) {
        let s = RadialSurface::new(ScalarField::from_fn(grid(), profile(&c)), "sym").unwrap();
        let b = s.geometry().unwrap();
        prop_assert!(b.christoffel.asymmetry() < 1e-14);
        prop_assert!(b.metric_compatibility_residual(&s) < 1e-10);
    }

    #[test]
    fn interpolation_reproduces_polynomials(c in coefficients(1.0), a in 0.0f64..3.1, b in 0.0f64..6.28) {
        let f = ScalarField::from_fn(grid(), profile(&c));
        let x = [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()];
        let v = evaluate(&f, &x).unwrap();
        prop_assert!((v - profile(&c)(&x)).abs() < 1e-12);
    }
}
