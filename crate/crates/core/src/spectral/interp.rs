//! Evaluation of sampled fields at arbitrary directions with the same
//! basis as the differentiation operators.

use super::field::{check_same, ScalarField};
use super::grid::{direction_trig, SphereGrid};
use super::quadrature::{barycentric_coefficients, fourier_coefficients};
use crate::{Error, Result};
use std::sync::Arc;

/// One or more fields on a common grid prepared for repeated off-grid evaluation.
///
/// The parity split along the outermost axis is computed once; each
/// evaluation then contracts one axis at a time, outermost first.
#[derive(Debug, Clone)]
pub struct Interpolant {
    grid: Arc<SphereGrid>,
    parts: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Interpolant {
    pub fn new(field: &ScalarField) -> Self {
        Self::many(std::slice::from_ref(field)).expect("a single field shares its own grid")
    }

    /// Prepares several fields for simultaneous evaluation.
    pub fn many(fields: &[ScalarField]) -> Result<Self> {
        let grid = fields
            .first()
            .map(|f| f.grid().clone())
            .ok_or_else(|| Error::Numeric("no fields to interpolate".into()))?;
        let mut parts = Vec::with_capacity(fields.len());
        for f in fields {
            check_same(&grid, f.grid())?;
            parts.push(parity_split(&grid, f.values(), 0));
        }
        Ok(Interpolant { grid, parts })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    /// Value of the (first) interpolant at a unit vector of `R^{n+1}`.
    pub fn evaluate(&self, direction: &[f64]) -> Result<f64> {
        Ok(self.evaluate_all(direction)?[0])
    }

    /// Values of every prepared field at a unit vector.
    pub fn evaluate_all(&self, direction: &[f64]) -> Result<Vec<f64>> {
        let grid = &self.grid;
        let n = grid.n();
        check_direction(n, direction)?;
        let (cos, sin) = direction_trig(n, direction);
        let polar: Vec<Vec<f64>> = (0..n - 1)
            .map(|a| barycentric_coefficients(&grid.polar[a].cos, &grid.polar[a].bary, cos[a]))
            .collect();
        let phi = sin[n - 1].atan2(cos[n - 1]);
        let azimuth = fourier_coefficients(grid.shape()[n - 1], phi);
        Ok(self
            .parts
            .iter()
            .map(|(even, odd)| {
                let mut current = contract_polar(grid, even, odd, 0, &polar[0], sin[0]);
                for a in 1..n - 1 {
                    let (e, o) = parity_split(grid, &current, a);
                    current = contract_polar(grid, &e, &o, a, &polar[a], sin[a]);
                }
                azimuth.iter().zip(&current).map(|(c, v)| c * v).sum()
            })
            .collect())
    }
}

/// Value of `field` at a unit vector; see [`Interpolant`] for repeated use.
pub fn evaluate(field: &ScalarField, direction: &[f64]) -> Result<f64> {
    Interpolant::new(field).evaluate(direction)
}

pub(crate) fn check_direction(n: usize, direction: &[f64]) -> Result<()> {
    if direction.len() != n + 1 {
        return Err(Error::DirectionLength {
            expected: n + 1,
            got: direction.len(),
        });
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitDirection(norm));
    }
    Ok(())
}

/// Splits values over axes `a..n` into the parts even and odd under the
/// antipodal map of the inner sphere; the odd part is divided by `sin θ_a`.
fn parity_split(grid: &SphereGrid, v: &[f64], a: usize) -> (Vec<f64>, Vec<f64>) {
    let shape = grid.shape();
    let n = grid.n();
    let inner_dims = &shape[a + 1..];
    let inner: usize = inner_dims.iter().product();
    let polar = &grid.polar[a];
    let mut even = vec![0.0; v.len()];
    let mut odd = vec![0.0; v.len()];
    let mut idx = vec![0usize; inner_dims.len()];
    for j in 0..inner {
        let mut rem = j;
        for (k, d) in inner_dims.iter().enumerate().rev() {
            idx[k] = rem % d;
            rem /= d;
        }
        let mut partner = 0;
        for (k, d) in inner_dims.iter().enumerate() {
            let mirrored = if a + 1 + k == n - 1 {
                (idx[k] + d / 2) % d
            } else {
                d - 1 - idx[k]
            };
            partner = partner * d + mirrored;
        }
        for i in 0..shape[a] {
            let here = v[i * inner + j];
            let there = v[i * inner + partner];
            even[i * inner + j] = 0.5 * (here + there);
            odd[i * inner + j] = 0.5 * (here - there) / polar.sin[i];
        }
    }
    (even, odd)
}

fn contract_polar(
    grid: &SphereGrid,
    even: &[f64],
    odd: &[f64],
    a: usize,
    coef: &[f64],
    s: f64,
) -> Vec<f64> {
    let inner: usize = grid.shape()[a + 1..].iter().product();
    let mut out = vec![0.0; inner];
    for (i, b) in coef.iter().enumerate() {
        if *b == 0.0 {
            continue;
        }
        let e = &even[i * inner..(i + 1) * inner];
        let o = &odd[i * inner..(i + 1) * inner];
        for j in 0..inner {
            out[j] += b * (e[j] + s * o[j]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: [f64; 3]) -> Vec<f64> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        v.iter().map(|x| x / r).collect()
    }

    #[test]
    fn reproduces_nodes_and_linear_functions() {
        let grid = SphereGrid::new(2, &[12, 24]).unwrap();
        let f = ScalarField::from_fn(grid.clone(), |x| x[0] * x[2] + 0.2 * x[1] - x[2] * x[2]);
        let it = Interpolant::new(&f);
        for node in [0, 5, 77, grid.len() - 1] {
            let v = it.evaluate(grid.point(node)).unwrap();
            assert!((v - f.values()[node]).abs() < 1e-12);
        }
        for d in [
            [0.01, 0.02, 1.0],
            [0.3, -0.5, 0.2],
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0],
        ] {
            let x = unit(d);
            let expect = x[0] * x[2] + 0.2 * x[1] - x[2] * x[2];
            assert!((it.evaluate(&x).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_on_band_limited_fields_in_s3() {
        let grid = SphereGrid::new(3, &[8, 8, 16]).unwrap();
        let g = |x: &[f64]| x[0] * x[1] * x[3] + x[2] * x[2] - 0.5 * x[1];
        let f = ScalarField::from_fn(grid.clone(), g);
        let it = Interpolant::new(&f);
        let x = {
            let v = [0.3, -0.2, 0.5, 0.7];
            let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.map(|a| a / r)
        };
        assert!((it.evaluate(&x).unwrap() - g(&x)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_directions() {
        let grid = SphereGrid::new(2, &[8, 8]).unwrap();
        let f = ScalarField::constant(grid, 1.0);
        assert!(matches!(
            evaluate(&f, &[1.0, 0.0, 0.1]),
            Err(Error::NonUnitDirection(_))
        ));
        assert!(matches!(
            evaluate(&f, &[1.0, 0.0]),
            Err(Error::DirectionLength { .. })
        ));
    }
}
