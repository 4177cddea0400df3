//! Extrinsic finite-difference geometry of `ψ(x) = e^{f(x)} x`, used to
//! cross-check the closed-form geometry bundle.

use super::profile::ProfileFn;
use crate::geometry::GeometryBundle;
use crate::spectral::grid::point_from_angles;
use crate::spectral::SphereGrid;
use nalgebra::{DMatrix, DVector};

/// Step of the fourth-order central differences in the angles.
pub const FD_STEP: f64 = 1e-3;

/// Metric, unit normal and second fundamental form from finite differences
/// of the embedding; arrays are node-major like the bundle's fields.
#[derive(Debug, Clone)]
pub struct ExtrinsicGeometry {
    pub g: Vec<f64>,
    pub normal: Vec<f64>,
    pub a: Vec<f64>,
}

fn psi(profile: &ProfileFn, n: usize, angles: &[f64]) -> Vec<f64> {
    let x = point_from_angles(n, angles);
    let r = profile(&x).exp();
    x.iter().map(|v| r * v).collect()
}

fn shifted(angles: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut out = angles.to_vec();
    for &(axis, h) in moves {
        out[axis] += h;
    }
    out
}

const FIRST: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

fn first_derivative(profile: &ProfileFn, n: usize, angles: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (k, c) in FIRST {
        let p = psi(profile, n, &shifted(angles, &[(i, k * h)]));
        out.iter_mut()
            .zip(p)
            .for_each(|(o, v)| *o += c * v / (12.0 * h));
    }
    out
}

fn second_derivative(
    profile: &ProfileFn,
    n: usize,
    angles: &[f64],
    i: usize,
    j: usize,
    h: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if i == j {
        for (k, c) in [
            (-2.0, -1.0),
            (-1.0, 16.0),
            (0.0, -30.0),
            (1.0, 16.0),
            (2.0, -1.0),
        ] {
            let p = psi(profile, n, &shifted(angles, &[(i, k * h)]));
            out.iter_mut()
                .zip(p)
                .for_each(|(o, v)| *o += c * v / (12.0 * h * h));
        }
    } else {
        for (ki, ci) in FIRST {
            for (kj, cj) in FIRST {
                let p = psi(profile, n, &shifted(angles, &[(i, ki * h), (j, kj * h)]));
                out.iter_mut()
                    .zip(p)
                    .for_each(|(o, v)| *o += ci * cj * v / (144.0 * h * h));
            }
        }
    }
    out
}

/// Finite-difference geometry at every node of `grid`.
pub fn extrinsic_geometry(profile: &ProfileFn, grid: &SphereGrid, h: f64) -> ExtrinsicGeometry {
    let n = grid.n();
    let d = n + 1;
    let mut g = Vec::with_capacity(grid.len() * n * n);
    let mut normal = Vec::with_capacity(grid.len() * d);
    let mut a = Vec::with_capacity(grid.len() * n * n);
    for node in 0..grid.len() {
        let angles = grid.angles(node);
        let tangents: Vec<Vec<f64>> = (0..n)
            .map(|i| first_derivative(profile, n, &angles, i, h))
            .collect();
        let t = DMatrix::from_fn(d, n, |m, i| tangents[i][m]);
        for i in 0..n {
            for j in 0..n {
                g.push((0..d).map(|m| t[(m, i)] * t[(m, j)]).sum());
            }
        }
        // normal: the radial direction with its tangential part removed
        let x = DVector::from_column_slice(grid.point(node));
        let gram = t.transpose() * &t;
        let coef = gram
            .lu()
            .solve(&(t.transpose() * &x))
            .expect("tangents are independent");
        let mut nu = &x - &t * coef;
        nu /= nu.norm();
        normal.extend(nu.iter().copied());
        for i in 0..n {
            for j in 0..n {
                let dd = second_derivative(profile, n, &angles, i, j, h);
                a.push(-(0..d).map(|m| dd[m] * nu[m]).sum::<f64>());
            }
        }
    }
    ExtrinsicGeometry { g, normal, a }
}

/// Largest componentwise deviation of `(g, ν, A)` between a bundle and the oracle.
pub fn max_deviation(bundle: &GeometryBundle, oracle: &ExtrinsicGeometry) -> f64 {
    let pairs = [
        (bundle.g.data(), oracle.g.as_slice()),
        (bundle.normal.as_slice(), oracle.normal.as_slice()),
        (bundle.a.data(), oracle.a.as_slice()),
    ];
    pairs
        .iter()
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}
