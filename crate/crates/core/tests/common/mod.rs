//! Closed-form oracles that do not go through the library's geometry code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Point of the ellipsoid `Σ x_i²/a_i² = 1` on the ray through the unit vector `u`.
pub fn ellipsoid_point(axes: &[f64], u: &[f64]) -> Vec<f64> {
    let q: f64 = u.iter().zip(axes).map(|(x, a)| x * x / (a * a)).sum();
    u.iter().map(|x| x / q.sqrt()).collect()
}

/// Mean curvature (average of the two principal curvatures) of a triaxial
/// ellipsoid in R³ at a point on it, outward normal.
pub fn ellipsoid_mean_curvature(axes: &[f64], p: &[f64]) -> f64 {
    let (a, b, c) = (axes[0], axes[1], axes[2]);
    let q: f64 = p.iter().zip(axes).map(|(x, s)| x * x / s.powi(4)).sum();
    let r2: f64 = p.iter().map(|x| x * x).sum();
    (a * a + b * b + c * c - r2) / (2.0 * (a * b * c).powi(2) * q.powf(1.5))
}

/// Gauss curvature of a triaxial ellipsoid at a point on it.
pub fn ellipsoid_gauss_curvature(axes: &[f64], p: &[f64]) -> f64 {
    let (a, b, c) = (axes[0], axes[1], axes[2]);
    let q: f64 = p.iter().zip(axes).map(|(x, s)| x * x / s.powi(4)).sum();
    1.0 / ((a * b * c).powi(2) * q * q)
}

/// Area of the prolate spheroid with equatorial radius `a` < polar radius `c`.
pub fn prolate_area(a: f64, c: f64) -> f64 {
    let e = (1.0 - a * a / (c * c)).sqrt();
    2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin())
}

/// Composite Simpson rule on `[lo, hi]` with `m` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, m: usize) -> f64 {
    let h = (hi - lo) / m as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + k as f64 * h);
    }
    s * h / 3.0
}

/// Area-average of the mean curvature of a prolate spheroid, by Simpson in the
/// parametric angle `u` of `(a sin u cos v, a sin u sin v, c cos u)`.
pub fn prolate_mean_curvature_average(a: f64, c: f64) -> f64 {
    let area_element = |u: f64| {
        2.0 * PI * a * u.sin() * (c * c * u.sin().powi(2) + a * a * u.cos().powi(2)).sqrt()
    };
    let mean = |u: f64| {
        let p = [a * u.sin(), 0.0, c * u.cos()];
        ellipsoid_mean_curvature(&[a, a, c], &p)
    };
    let total = simpson(|u| mean(u) * area_element(u), 0.0, PI, 20_000);
    let area = simpson(area_element, 0.0, PI, 20_000);
    total / area
}
