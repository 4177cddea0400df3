//! Quadrature, pointwise tensor magnitudes and `L^p` / `W^{k,p}` norms.

use super::calculus::{grad, hessian_from_partials, partials};
use super::field::{check_same, Metric, ScalarField, TensorField, Valence};
use crate::{Error, Result};

/// `∫ f · density dV_σ`; `density = None` integrates against `dV_σ`.
pub fn integrate(field: &ScalarField, density: Option<&ScalarField>) -> Result<f64> {
    let w = field.grid().weights();
    match density {
        None => Ok(field.values().iter().zip(w).map(|(f, w)| f * w).sum()),
        Some(d) => {
            check_same(field.grid(), d.grid())?;
            Ok(field
                .values()
                .iter()
                .zip(d.values())
                .zip(w)
                .map(|((f, d), w)| f * d * w)
                .sum())
        }
    }
}

/// Anything with a pointwise magnitude relative to a metric.
pub trait Magnitude {
    /// `|T|` at every node, with indices raised and lowered by `metric`.
    fn magnitude(&self, metric: &Metric) -> Result<ScalarField>;
    fn grid_of(&self) -> &std::sync::Arc<super::SphereGrid>;
}

impl Magnitude for ScalarField {
    fn magnitude(&self, _metric: &Metric) -> Result<ScalarField> {
        Ok(self.map(f64::abs))
    }

    fn grid_of(&self) -> &std::sync::Arc<super::SphereGrid> {
        self.grid()
    }
}

impl Magnitude for TensorField {
    fn magnitude(&self, metric: &Metric) -> Result<ScalarField> {
        check_same(self.grid(), metric.grid())?;
        let grid = self.grid().clone();
        let n = grid.n();
        let values = (0..grid.len())
            .map(|node| {
                let t = self.at(node);
                let g = metric.g.at(node);
                let gi = metric.g_inv.at(node);
                let sq = match self.valence() {
                    Valence::Covector => quad1(t, gi, n),
                    Valence::Vector => quad1(t, g, n),
                    Valence::Covariant2 => quad2(t, gi, gi, n),
                    Valence::Contravariant2 => quad2(t, g, g, n),
                    Valence::Mixed => quad2(t, g, gi, n),
                };
                sq.max(0.0).sqrt()
            })
            .collect();
        ScalarField::new(grid, values)
    }

    fn grid_of(&self) -> &std::sync::Arc<super::SphereGrid> {
        self.grid()
    }
}

fn quad1(t: &[f64], m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[i * n + j] * t[i] * t[j];
        }
    }
    s
}

/// `P^{ik} Q^{jl} T_ij T_kl`.
fn quad2(t: &[f64], p: &[f64], q: &[f64], n: usize) -> f64 {
    // u_{kj} = Σ_i P^{ik} T_{ij}
    let mut u = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            u[k * n + j] = (0..n).map(|i| p[i * n + k] * t[i * n + j]).sum();
        }
    }
    let mut s = 0.0;
    for k in 0..n {
        for l in 0..n {
            let tq: f64 = (0..n).map(|j| u[k * n + j] * q[j * n + l]).sum();
            s += tq * t[k * n + l];
        }
    }
    s
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `(∫ |T|^p dV)^{1/p}`; `metric = None` uses the round metric and `dV_σ`,
/// otherwise the supplied metric and its density.
pub fn lp_norm<T: Magnitude + ?Sized>(field: &T, p: f64, metric: Option<&Metric>) -> Result<f64> {
    check_exponent(p)?;
    let round;
    let (m, density) = match metric {
        Some(m) => (m, Some(&m.density)),
        None => {
            round = Metric::round(field.grid_of());
            (&round, None)
        }
    };
    let mag = field.magnitude(m)?;
    let scale = mag.max();
    if scale == 0.0 || !scale.is_finite() {
        return Ok(if scale == 0.0 { 0.0 } else { scale });
    }
    // factor out the maximum so large p cannot overflow
    let integral = integrate(&mag.map(|v| (v / scale).powf(p)), density)?;
    Ok(scale * integral.powf(1.0 / p))
}

/// Which seminorms enter a Sobolev norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SobolevVariant {
    /// `Σ_{k ≤ order} ||∇^k f||_p`.
    Full,
    /// `||f||_p + ||∇^order f||_p`.
    Alternative,
}

/// `W^{order,p}_σ` norm of a scalar field, `order ∈ {1, 2}`.
pub fn sobolev_norm(
    field: &ScalarField,
    p: f64,
    order: usize,
    variant: SobolevVariant,
) -> Result<f64> {
    check_exponent(p)?;
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let base = lp_norm(field, p, None)?;
    if order == 1 {
        return Ok(base + lp_norm(&grad(field), p, None)?);
    }
    let (first, second) = partials(field);
    let hess = hessian_from_partials(&first, &second);
    let top = lp_norm(&hess, p, None)?;
    Ok(match variant {
        SobolevVariant::Full => base + lp_norm(&first, p, None)? + top,
        SobolevVariant::Alternative => base + top,
    })
}

/// Largest absolute nodal value.
pub fn sup_norm(field: &ScalarField) -> f64 {
    field.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `max f − min f` over the nodes.
pub fn osc(field: &ScalarField) -> f64 {
    field.max() - field.min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SphereGrid;
    use std::f64::consts::PI;

    #[test]
    fn integrals_on_s2() {
        let grid = SphereGrid::new(2, &[16, 32]).unwrap();
        let one = ScalarField::constant(grid.clone(), 1.0);
        assert!((integrate(&one, None).unwrap() - 4.0 * PI).abs() < 1e-12);
        let z = ScalarField::from_fn(grid.clone(), |x| x[2]);
        assert!(integrate(&z, None).unwrap().abs() < 1e-12);
        let z2 = z.map(|v| v * v);
        assert!((integrate(&z2, None).unwrap() - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn norms_of_simple_fields() {
        let grid = SphereGrid::new(2, &[16, 32]).unwrap();
        let one = ScalarField::constant(grid.clone(), 1.0);
        assert!((lp_norm(&one, 2.0, None).unwrap() - (4.0 * PI).sqrt()).abs() < 1e-12);
        let m = Metric::round(&grid);
        assert!((lp_norm(&m.g, 2.0, None).unwrap() - (8.0 * PI).sqrt()).abs() < 1e-12);
        assert!(lp_norm(&one, 1.0, None).is_err());
        assert!(lp_norm(&one, f64::INFINITY, None).is_err());
    }

    #[test]
    fn sobolev_of_linear_function() {
        let grid = SphereGrid::new(2, &[16, 32]).unwrap();
        let f = ScalarField::from_fn(grid.clone(), |x| x[2]);
        let l2 = lp_norm(&f, 2.0, None).unwrap();
        let g2 = lp_norm(&grad(&f), 2.0, None).unwrap();
        let full = sobolev_norm(&f, 2.0, 2, SobolevVariant::Full).unwrap();
        assert!((full - (l2 + g2 + 2f64.sqrt() * l2)).abs() < 1e-10);
        let alt = sobolev_norm(&f, 2.0, 2, SobolevVariant::Alternative).unwrap();
        assert!((alt - (1.0 + 2f64.sqrt()) * l2).abs() < 1e-10);
        assert!(matches!(
            sobolev_norm(&f, 2.0, 3, SobolevVariant::Full),
            Err(Error::UnsupportedOrder(3))
        ));
    }

    #[test]
    fn sup_and_osc() {
        let grid = SphereGrid::new(2, &[32, 64]).unwrap();
        let f = ScalarField::from_fn(grid.clone(), |x| x[2]);
        assert!((osc(&f) - 2.0).abs() < 1e-2);
        assert_eq!(osc(&ScalarField::constant(grid.clone(), 5.0)), 0.0);
        let g = ScalarField::from_fn(grid, |x| 0.3 * x[0]);
        assert!((sup_norm(&g) - 0.3).abs() < 1e-2);
    }
}
